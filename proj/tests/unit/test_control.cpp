#include <doctest.h>

#include <vector>

#include "helpers.hpp"
#include "phdae/control.hpp"
#include "phdae/errors.hpp"

using namespace phdae;
using namespace phdae::testing;

TEST_CASE("damping_source") {
  SUBCASE("applies u = -K y") {
    Matrix K(2, 2);
    K << 0.3, 0.1, 0.1, 0.5;
    const ControlSource source = damping_source(DampingGain{K});
    const Vector u = source.next(4, vec2(1.0, -2.0));
    CHECK(u[0] == doctest::Approx(-(0.3 - 0.2)).epsilon(1e-14));
    CHECK(u[1] == doctest::Approx(-(0.1 - 1.0)).epsilon(1e-14));
  }
  SUBCASE("a zero gain is allowed and yields zero commands") {
    const ControlSource source = damping_source(DampingGain{Matrix::Zero(2, 2)});
    CHECK(inf_norm(source.next(0, vec2(3.0, -1.0))) == 0.0);
  }
  SUBCASE("a semi-definite gain with a null direction is allowed") {
    Matrix K(2, 2);
    K << 1.0, 0.0, 0.0, 0.0;
    CHECK_NOTHROW(damping_source(DampingGain{K}));
  }
  SUBCASE("rejects a non-square gain") {
    CHECK_THROWS_AS(damping_source(DampingGain{Matrix::Zero(2, 3)}), Error);
  }
  SUBCASE("rejects an asymmetric gain") {
    Matrix K(2, 2);
    K << 0.3, 0.2, -0.2, 0.3;
    CHECK_THROWS_AS(damping_source(DampingGain{K}), Error);
  }
  SUBCASE("rejects an indefinite gain") {
    Matrix K(2, 2);
    K << 1.0, 0.0, 0.0, -0.2;
    CHECK_THROWS_AS(damping_source(DampingGain{K}), Error);
  }
}

TEST_CASE("sequence_source") {
  SUBCASE("replays rows and holds the last one") {
    const std::vector<Vector> rows{vec2(1.0, 2.0), vec2(3.0, 4.0)};
    const ControlSource source = sequence_source(rows);
    CHECK(source.next(0, vec2(9.0, 9.0))[0] == 1.0);
    CHECK(source.next(1, vec2(9.0, 9.0))[1] == 4.0);
    CHECK(source.next(7, vec2(9.0, 9.0))[0] == 3.0);  // held
    CHECK(source.next(-2, vec2(9.0, 9.0))[0] == 1.0); // clamped
  }
  SUBCASE("rejects an empty sequence") {
    CHECK_THROWS_AS(sequence_source({}), Error);
  }
  SUBCASE("rejects rows of mixed dimension") {
    std::vector<Vector> rows;
    rows.push_back(vec2(1.0, 2.0));
    rows.push_back(Vector::Zero(3));
    CHECK_THROWS_AS(sequence_source(rows), Error);
  }
}

TEST_CASE("zero_source") {
  const ControlSource source = zero_source(2);
  const Vector u = source.next(12, vec2(5.0, -5.0));
  CHECK(u.size() == 2);
  CHECK(inf_norm(u) == 0.0);
}
