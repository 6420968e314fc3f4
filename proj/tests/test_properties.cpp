#include "properties.hpp"
#include "test_support.hpp"

namespace {

void expect(const properties::Report& r) {
  INFO(r.first_failure);
  MESSAGE(r.exercised << " of " << r.cases << " cases exercised");
  CHECK(r.cases >= 1000);
  CHECK(r.failures == 0);
  CHECK(r.exercised >= r.cases / 2);
}

}  // namespace

TEST_CASE("cover nestedness") { expect(properties::cover_nestedness(1000, 101)); }
TEST_CASE("outer-measure monotonicity") { expect(properties::outer_monotonicity(1000, 202)); }
TEST_CASE("Moran-map monotonicity") { expect(properties::moran_monotonicity(1000, 303)); }
TEST_CASE("affine equivariance") { expect(properties::affine_equivariance(1000, 404)); }
TEST_CASE("certificate soundness") { expect(properties::certificate_soundness(1000, 505)); }
