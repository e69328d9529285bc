#include <gtest/gtest.h>

#include "cryocmos/error.hpp"
#include "cryocmos/touchstone.hpp"

using namespace cryo;

TEST(Touchstone, ReadsMagnitudeAngle) {
    const TwoPort n = read_touchstone(
        "! comment\n"
        "# MHz S MA R 50\n"
        "100 0.5 90 2 0 0.1 -90 0.25 180\n");
    ASSERT_EQ(n.size(), 1u);
    EXPECT_DOUBLE_EQ(n.freqs[0], 1e8);
    EXPECT_NEAR(n.mats[0](0, 0).imag(), 0.5, 1e-15);
    // Column order is S11 S21 S12 S22.
    EXPECT_NEAR(n.mats[0](1, 0).real(), 2.0, 1e-15);
    EXPECT_NEAR(n.mats[0](0, 1).imag(), -0.1, 1e-15);
    EXPECT_NEAR(n.mats[0](1, 1).real(), -0.25, 1e-15);
}

TEST(Touchstone, ReadsDecibel) {
    const TwoPort n = read_touchstone("# GHz S DB R 75\n1 -20 0 0 0 0 0 -6.0206 0\n");
    EXPECT_DOUBLE_EQ(n.z0, 75.0);
    EXPECT_NEAR(n.mats[0](0, 0).real(), 0.1, 1e-12);
    EXPECT_NEAR(n.mats[0](1, 1).real(), 0.5, 1e-5);
}

TEST(Touchstone, DefaultOptionLine) {
    const TwoPort n = read_touchstone("2 1 0 0 0 0 0 1 0\n");
    EXPECT_DOUBLE_EQ(n.freqs[0], 2e9);
    EXPECT_DOUBLE_EQ(n.z0, 50.0);
}

TEST(Touchstone, RoundTripIsExact) {
    TwoPort n;
    n.freqs = {1.2345678901234567e9, 3.3e9, 4.0e10};
    for (int i = 0; i < 3; ++i) {
        Mat2 m;
        m << Complex(0.1 * i, -0.3333333333333333), Complex(1.0 / 7.0, 2e-17), Complex(-0.9, 0.0), Complex(0.5, 0.1);
        n.mats.push_back(m);
    }
    for (FreqUnit u : {FreqUnit::Hz, FreqUnit::GHz}) {
        const TwoPort back = read_touchstone(write_touchstone(n, u, "a\nb"));
        ASSERT_EQ(back.size(), n.size());
        for (std::size_t i = 0; i < n.size(); ++i) {
            if (u == FreqUnit::Hz) EXPECT_EQ(back.freqs[i], n.freqs[i]);
            EXPECT_EQ(back.mats[i], n.mats[i]);
        }
    }
}

TEST(Touchstone, ErrorsCarryLineNumbers) {
    try {
        read_touchstone("# GHz S RI R 50\n1 0 0 0 0 0 0 0 0\n2 0 0 x 0 0 0 0 0\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
    EXPECT_THROW(read_touchstone("# GHz Y RI R 50\n1 0 0 0 0 0 0 0 0\n"), ParseError);
    EXPECT_THROW(read_touchstone("# GHz S XX R 50\n"), ParseError);
    EXPECT_THROW(read_touchstone("# GHz S RI R 50\n1 0 0 0 0 0 0 0\n"), ParseError);
    EXPECT_THROW(read_touchstone("# GHz S RI R 50\n2 0 0 0 0 0 0 0 0\n1 0 0 0 0 0 0 0 0\n"), ParseError);
    EXPECT_THROW(read_touchstone("# GHz S RI R 50\n1 0 0 0 0 0 0 0 0\n5 1 2 3 4\n"), ParseError);
    EXPECT_THROW(read_touchstone("[Version] 2.0\n"), ParseError);
    EXPECT_THROW(read_touchstone("! nothing\n"), ParseError);
}
