#include <doctest.h>

#include <sstream>

#include "flexqr/errors.hpp"
#include "flexqr/panel_io.hpp"
#include "flexqr/simstudy.hpp"

using namespace flexqr;

TEST_CASE("dataset -> CSV -> dataset round trip") {
  DgpSpec spec;
  spec.n = 12;
  spec.T = 4;
  const PanelDataset d = generate(spec);
  std::stringstream ss;
  const PanelConfig cfg = write_panel_csv(ss, d);
  const PanelDataset e = parse_panel_csv(ss, cfg);
  REQUIRE(e.units.size() == d.units.size());
  CHECK(e.k == d.k);
  CHECK(e.l == d.l);
  CHECK(e.z_in_x == d.z_in_x);
  for (std::size_t i = 0; i < d.units.size(); ++i) {
    CHECK(e.units[i].id == d.units[i].id);
    CHECK((e.units[i].y - d.units[i].y).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((e.units[i].X - d.units[i].X).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((e.units[i].Z - d.units[i].Z).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("time dummies, quoting and unit grouping") {
  std::istringstream csv(
      "unit_id,year,y,x1\n"
      "\"b,1\",2001,1.5,0.1\n"
      "a,2000,2.0,0.2\n"
      "\"b,1\",2000,3.0,0.3\n"
      "a,2002,4.0,0.4\n");
  std::istringstream conf("x = intercept, x1\nz = intercept\ntime_dummies = year\n");
  const PanelConfig cfg = parse_panel_config(conf);
  const PanelDataset d = parse_panel_csv(csv, cfg);
  REQUIRE(d.units.size() == 2);
  CHECK(d.units[0].id == "b,1");
  CHECK(d.units[0].y.size() == 2);
  CHECK(d.k == 4);
  CHECK(d.x_names[2] == "year_2001");
  CHECK(d.x_names[3] == "year_2002");
  // b,1 rows: 2001 then 2000
  CHECK(d.units[0].X(0, 2) == 1.0);
  CHECK(d.units[0].X(1, 2) == 0.0);
  CHECK(d.units[1].X(1, 3) == 1.0);
  CHECK(d.z_in_x == std::vector<int>{0});
}

TEST_CASE("missing required column") {
  std::istringstream csv("id,y,x1\n1,2,3\n");
  std::istringstream conf("x = x1\nz = x1\n");
  const PanelConfig cfg = parse_panel_config(conf);
  try {
    parse_panel_csv(csv, cfg);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("unit_id") != std::string::npos);
  }
}
