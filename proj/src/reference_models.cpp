#include "hostpar/reference_models.hpp"

namespace hostpar::reference {

namespace {

JointOffspringLaw law(std::vector<SupportPoint> s, const char* name) {
  return JointOffspringLaw::from_support(std::move(s), name);
}

ModelFile named(ModelParams p, const char* name) {
  ModelFile f;
  f.params = std::move(p);
  f.name = name;
  return f;
}

}  // namespace

ModelFile m1() {
  ModelParams p;
  p.p_AA = 0.5;
  p.p_AB = 0.25;
  p.p_BB = 0.25;
  p.law_A_AA = law({{0, 1, 0.5}, {2, 1, 0.5}}, "law_A_AA");
  p.law_A_AB = law({{0, 1, 0.25}, {2, 1, 0.75}}, "law_A_AB");
  p.law_A_BB = JointOffspringLaw::point_mass(1, 1);
  p.law_B = law({{1, 1, 0.5}, {2, 0, 0.5}}, "law_B");
  return named(std::move(p), "M1");
}

ModelFile m2() {
  ModelFile f = m1();
  f.params.law_A_AA = JointOffspringLaw::independent({0.75, 0.0, 0.25}, {0.75, 0.0, 0.25}, "law_A_AA");
  f.params.law_A_AB = law({{0, 1, 0.5}, {1, 1, 0.5}}, "law_A_AB");
  f.name = "M2";
  return f;
}

ModelFile m3() {
  ModelParams p;
  p.p_AA = 0.3;
  p.p_AB = 0.5;
  p.p_BB = 0.2;
  const std::vector<double> a_marginal{0.3, 0.3, 0.4};
  const std::vector<double> b_marginal{0.3, 0.68, 0.02};
  p.law_A_AA = JointOffspringLaw::independent(a_marginal, a_marginal, "law_A_AA");
  p.law_A_AB = JointOffspringLaw::independent(a_marginal, {0.95, 0.05}, "law_A_AB");
  p.law_A_BB = law({{0, 0, 0.9}, {1, 0, 0.05}, {0, 1, 0.05}}, "law_A_BB");
  p.law_B = JointOffspringLaw::independent(b_marginal, b_marginal, "law_B");
  return named(std::move(p), "M3");
}

ModelFile gw_test() {
  ModelFile f = m1();
  f.params.law_B = law({{0, 0, 0.25}, {2, 0, 0.375}, {0, 2, 0.375}}, "law_B");
  f.name = "GW";
  return f;
}

ModelFile edge_pAA0() {
  ModelFile f = m1();
  f.params.p_AA = 0.0;
  f.params.p_AB = 0.5;
  f.params.p_BB = 0.5;
  f.name = "edge_pAA0";
  return f;
}

ModelFile edge_delta1() {
  ModelFile f = m1();
  f.params.p_AA = 0.0;
  f.params.p_AB = 1.0;
  f.params.p_BB = 0.0;
  f.params.law_A_AB = JointOffspringLaw::point_mass(1, 1);
  f.name = "edge_delta1";
  return f;
}

const std::vector<Named>& all() {
  static const std::vector<Named> models{
      {"m1.json", m1},           {"m2.json", m2},
      {"m3.json", m3},           {"gw_test.json", gw_test},
      {"edge_pAA0.json", edge_pAA0}, {"edge_delta1.json", edge_delta1},
  };
  return models;
}

}  // namespace hostpar::reference
