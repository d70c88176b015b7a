#include <cmath>
#include <cstring>
#include <string>

#include "cocyclab/cocyclab.h"
#include "doctest.h"

namespace {

std::string artifact(const cl_run* r, const char* name) {
  for (size_t i = 0; i < cl_run_artifact_count(r); ++i) {
    if (std::strcmp(cl_run_artifact_name(r, i), name) == 0) {
      size_t size = 0;
      const char* data = cl_run_artifact_data(r, i, &size);
      return std::string(data, size);
    }
  }
  return {};
}

}  // namespace

TEST_CASE("constant diag(2, 1/2) through the C interface") {
  cl_base* b = nullptr;
  REQUIRE(cl_base_golden(1024, &b) == CL_OK);
  cl_cocycle* co = nullptr;
  REQUIRE(cl_cocycle_constant(b, 2.0, 0.0, 0.0, 0.5, &co) == CL_OK);
  double l = 0.0;
  REQUIRE(cl_lyapunov(co, 0.25, 1000, &l) == CL_OK);
  CHECK(std::abs(l - std::log(2.0)) < 1e-12);

  cl_run* r = nullptr;
  REQUIRE(cl_run_growth_test(co, 0.5, 1000, 2, &r) == CL_OK);
  CHECK(cl_run_passed(r) == 0);
  CHECK(artifact(r, "growth_test.csv").rfind("x,value\n", 0) == 0);
  cl_run_free(r);

  CHECK(cl_run_surgery(co, 0.1, 0, 1, &r) == CL_NOT_APPLICABLE);
  CHECK(std::strlen(cl_last_error()) > 0);
  cl_cocycle_free(co);
  cl_base_free(b);
}

TEST_CASE("invalid arguments are reported as status codes") {
  cl_base* b = nullptr;
  CHECK(cl_base_golden(1, &b) != CL_OK);
  CHECK(cl_base_golden(64, nullptr) == CL_INVALID_ARGUMENT);
  CHECK(std::string(cl_status_name(CL_SHRINK_EXHAUSTED)) == "ShrinkExhausted");
  cl_run* r = nullptr;
  CHECK(cl_run_castle(nullptr, 5, 1, &r) == CL_INVALID_ARGUMENT);
}

TEST_CASE("castle run emits one row per tower") {
  cl_base* b = nullptr;
  REQUIRE(cl_base_silver(256, &b) == CL_OK);
  cl_run* r = nullptr;
  REQUIRE(cl_run_castle(b, 7, 1, &r) == CL_OK);
  CHECK(cl_run_passed(r) == 1);
  const std::string csv = artifact(r, "castle.csv");
  CHECK(csv.rfind("lo,hi,height", 0) == 0);
  cl_run_free(r);
  cl_base_free(b);
}

TEST_CASE("table cocycle reproduces its entries on the grid") {
  cl_base* b = nullptr;
  REQUIRE(cl_base_golden(4, &b) == CL_OK);
  const double entries[] = {2, 0, 0, 0.5, 1, 1, 0, 1, 1, 0, 0, 1, 0, -1, 1, 0};
  cl_cocycle* co = nullptr;
  REQUIRE(cl_cocycle_table(b, entries, 4, &co) == CL_OK);
  CHECK(std::strlen(cl_cocycle_describe(co)) > 0);
  const double bad[] = {1, 1, 1, 1};
  cl_cocycle* co2 = nullptr;
  CHECK(cl_cocycle_table(b, bad, 1, &co2) != CL_OK);
  cl_cocycle_free(co);
  cl_base_free(b);
}
