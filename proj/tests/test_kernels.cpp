#include <catch_amalgamated.hpp>

#include "loadcast/kernels.hpp"
#include "loadcast/numlin.hpp"
#include "loadcast/rng.hpp"

using namespace loadcast;
using Catch::Matchers::WithinAbs;

namespace {

CalendarPoint random_point(Rng& rng) {
  return CalendarPoint{24.0 * 0.999 * rng.uniform(), 1.0 + 365.0 * rng.uniform(),
                       static_cast<int>(rng.below(7))};
}

bool same_tree(const KernelExpr& a, const KernelExpr& b) {
  if (a.kind != b.kind || a.sigma != b.sigma || a.children.size() != b.children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!same_tree(*a.children[i], *b.children[i])) return false;
  }
  return true;
}

KernelPtr random_tree(Rng& rng, int depth) {
  double pick = rng.uniform();
  if (depth <= 0 || pick < 0.5) {
    switch (rng.below(3)) {
      case 0: return KernelExpr::time_atom(0.5 + 10.0 * rng.uniform());
      case 1: return KernelExpr::day_atom(1.0 + 200.0 * rng.uniform());
      default: return KernelExpr::class_atom();
    }
  }
  std::vector<KernelPtr> children;
  const auto n = 2 + rng.below(2);
  for (std::uint64_t i = 0; i < n; ++i) children.push_back(random_tree(rng, depth - 1));
  return pick < 0.75 ? KernelExpr::sum(std::move(children))
                     : KernelExpr::product(std::move(children));
}

}  // namespace

TEST_CASE("periodic distance") {
  CHECK(periodic_distance(0.0, 24.0) == 0.0);
  CHECK(periodic_distance(22.0, 24.0) == 2.0);
  CHECK(periodic_distance(12.0, 24.0) == 12.0);
  CHECK_THROWS_AS(periodic_distance(-1.0, 24.0), std::invalid_argument);
  CHECK_THROWS_AS(periodic_distance(25.0, 24.0), std::invalid_argument);
  CHECK_THROWS_AS(periodic_distance(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("atom values match hand evaluation") {
  auto kt = KernelExpr::time_atom(4.0);
  CHECK_THAT(eval_kernel(kt, {0.0, 1, 0}, {12.0, 1, 0}), WithinAbs(std::exp(-3.0), 1e-12));
  CHECK_THAT(eval_kernel(kt, {1.5, 1, 0}, {23.5, 1, 0}), WithinAbs(std::exp(-0.5), 1e-12));

  auto kd = KernelExpr::day_atom(120.0);
  CHECK_THAT(eval_kernel(kd, {0.0, 1, 0}, {0.0, 366, 0}),
             WithinAbs(std::exp(-1.0 / 120.0), 1e-12));

  auto kc = KernelExpr::class_atom();
  CHECK(eval_kernel(kc, {0.0, 1, 3}, {0.0, 1, 3}) == 1.0);
  CHECK(eval_kernel(kc, {0.0, 1, 3}, {0.0, 1, 4}) == 0.0);
}

TEST_CASE("default bandwidths") {
  auto k = parse_kernel_expr("kt + kd");
  REQUIRE(k->children.size() == 2);
  CHECK(k->children[0]->sigma == 4.0);
  CHECK(k->children[1]->sigma == 120.0);
}

TEST_CASE("parser structure") {
  auto p = parse_kernel_expr("kd * kt * kc");
  REQUIRE(p->kind == KernelExpr::Kind::product);
  REQUIRE(p->children.size() == 3);
  CHECK(p->children[0]->kind == KernelExpr::Kind::day_of_year);
  CHECK(p->children[1]->kind == KernelExpr::Kind::time_of_day);
  CHECK(p->children[2]->kind == KernelExpr::Kind::day_type);

  auto q = parse_kernel_expr("(kd + kt) * kc");
  REQUIRE(q->kind == KernelExpr::Kind::product);
  REQUIRE(q->children.size() == 2);
  CHECK(q->children[0]->kind == KernelExpr::Kind::sum);
  CHECK(q->children[1]->kind == KernelExpr::Kind::day_type);

  // precedence: '*' binds tighter than '+'
  auto r = parse_kernel_expr("kd + kt * kc");
  REQUIRE(r->kind == KernelExpr::Kind::sum);
  REQUIRE(r->children.size() == 2);
  CHECK(r->children[1]->kind == KernelExpr::Kind::product);

  auto s = parse_kernel_expr("kt(sigma=2.5)");
  CHECK(s->sigma == 2.5);
}

TEST_CASE("parser rejects bad input") {
  CHECK_THROWS_AS(parse_kernel_expr("kt(sigma=0)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel_expr("kt(sigma=-1)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel_expr("kx"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel_expr("kt +"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel_expr("(kt + kd"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel_expr(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel_expr("kt kd"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel_expr("kc(sigma=1)"), std::invalid_argument);

  try {
    parse_kernel_expr("kt + zz");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find("zz") != std::string::npos);       // names the token
    CHECK(msg.find("position") != std::string::npos); // reports where
  }
}

TEST_CASE("presets") {
  CHECK(to_string(preset_kernel("am1")) == "kt(sigma=4) + kd(sigma=120)");
  CHECK(to_string(preset_kernel("am2")) == "kt(sigma=4) + kd(sigma=120) + kc");
  CHECK(to_string(preset_kernel("sam1")) == "kd(sigma=120) + kt(sigma=4) * kc");
  CHECK(to_string(preset_kernel("sam2")) == "(kt(sigma=4) + kd(sigma=120)) * kc");
  CHECK(to_string(preset_kernel("mm1")) == "kt(sigma=4) * kd(sigma=120)");
  CHECK(to_string(preset_kernel("mm2")) == "kt(sigma=4) * kd(sigma=120) * kc");
  CHECK_THROWS_AS(preset_kernel("am3"), std::invalid_argument);
}

TEST_CASE("gram examples") {
  CalendarPoint x{1.5, 10, 2};
  auto two_atoms = parse_kernel_expr("kt + kd");
  Eigen::MatrixXd g1 = gram(two_atoms, {x});
  REQUIRE(g1.rows() == 1);
  CHECK_THAT(g1(0, 0), WithinAbs(2.0, 1e-15));

  auto kc = parse_kernel_expr("kc");
  std::vector<CalendarPoint> pts = {{0.0, 1, 0}, {3.0, 5, 0}, {6.0, 9, 1}};
  Eigen::MatrixXd g2 = gram(kc, pts);
  Eigen::MatrixXd expected(3, 3);
  expected << 1, 1, 0, 1, 1, 0, 0, 0, 1;
  CHECK((g2 - expected).cwiseAbs().maxCoeff() == 0.0);

  std::vector<CalendarPoint> pair = {{0.0, 42, 1}, {12.0, 42, 5}};
  Eigen::MatrixXd g3 = gram(two_atoms, pair);
  CHECK_THAT(g3(0, 1), WithinAbs(std::exp(-3.0) + 1.0, 1e-12));
  CHECK(g3(0, 1) == g3(1, 0));
}

TEST_CASE("periodicity and symmetry over random pairs") {
  Rng rng(2024);
  auto kt = KernelExpr::time_atom(4.0);
  auto kd = KernelExpr::day_atom(120.0);
  auto mixed = parse_kernel_expr("kd + kt * kc");
  for (int n = 0; n < 1000; ++n) {
    CalendarPoint a = random_point(rng);
    CalendarPoint b = random_point(rng);

    // the time kernel lives on a 24 h circle: rotating both arguments by the
    // same shift (reduced back into [0, 24)) leaves the value unchanged
    double shift = 24.0 * rng.uniform();
    CalendarPoint a_rot = a, b_rot = b;
    a_rot.time_of_day = std::fmod(a.time_of_day + shift, 24.0);
    b_rot.time_of_day = std::fmod(b.time_of_day + shift, 24.0);
    CHECK_THAT(eval_kernel(kt, a_rot, b_rot), WithinAbs(eval_kernel(kt, a, b), 1e-12));

    // same for the yearly kernel on its 366-day circle
    double dshift = 366.0 * rng.uniform();
    CalendarPoint a_rotd = a, b_rotd = b;
    a_rotd.day_of_year = std::fmod(a.day_of_year - 1.0 + dshift, 366.0) + 1.0;
    b_rotd.day_of_year = std::fmod(b.day_of_year - 1.0 + dshift, 366.0) + 1.0;
    CHECK_THAT(eval_kernel(kd, a_rotd, b_rotd), WithinAbs(eval_kernel(kd, a, b), 1e-12));

    // symmetry of a composite expression
    CHECK(eval_kernel(mixed, a, b) == eval_kernel(mixed, b, a));
  }
}

TEST_CASE("atom and composite ranges") {
  Rng rng(11);
  auto product = parse_kernel_expr("kt * kd * kc");
  auto sum3 = parse_kernel_expr("kt + kd + kc");
  for (int n = 0; n < 500; ++n) {
    CalendarPoint a = random_point(rng);
    CalendarPoint b = random_point(rng);
    double p = eval_kernel(product, a, b);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    double s = eval_kernel(sum3, a, b);
    CHECK(s >= 0.0);
    CHECK(s <= 3.0);
  }
}

TEST_CASE("preset Gram matrices are positive semidefinite") {
  Rng rng(7);
  std::vector<CalendarPoint> pts;
  for (int n = 0; n < 200; ++n) pts.push_back(random_point(rng));
  for (const char* name : {"am1", "am2", "sam1", "sam2", "mm1", "mm2"}) {
    Eigen::MatrixXd g = gram(preset_kernel(name), pts);
    SymEig eig = sym_eig(g);
    INFO("preset " << name);
    CHECK(eig.values.minCoeff() >= -1e-8 * eig.values.maxCoeff());
  }
}

TEST_CASE("pretty-print round trip") {
  Rng rng(99);
  for (int n = 0; n < 200; ++n) {
    KernelPtr tree = random_tree(rng, 3);
    std::string text = to_string(tree);
    KernelPtr back = parse_kernel_expr(text);
    INFO(text);
    CHECK(same_tree(*tree, *back));
    CHECK(to_string(back) == text);
  }
}
