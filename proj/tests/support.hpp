#pragma once

// Shared helpers for the test suites: an exact rational scalar, the
// rational-arithmetic golden pipeline for the bundled quartet fixture, and
// small generators.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "latree/coords.hpp"
#include "latree/params.hpp"
#include "latree/selftest.hpp"
#include "latree/tree.hpp"

namespace tsupport {

// Exact rational on __int128; plenty of headroom for 4-leaf fixtures.
struct Rat {
    __int128 num = 0;
    __int128 den = 1;

    Rat() = default;
    Rat(long long n) : num(n), den(1) {}
    Rat(long long n, long long d) : num(n), den(d) { normalize(); }

    static __int128 gcd(__int128 a, __int128 b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    void normalize() {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        __int128 g = gcd(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    friend Rat operator+(Rat a, Rat b) {
        Rat r;
        r.num = a.num * b.den + b.num * a.den;
        r.den = a.den * b.den;
        r.normalize();
        return r;
    }
    friend Rat operator-(Rat a, Rat b) {
        Rat r;
        r.num = a.num * b.den - b.num * a.den;
        r.den = a.den * b.den;
        r.normalize();
        return r;
    }
    friend Rat operator*(Rat a, Rat b) {
        Rat r;
        r.num = a.num * b.num;
        r.den = a.den * b.den;
        r.normalize();
        return r;
    }
    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num == b.num && a.den == b.den;
    }

    double value() const { return double(num) / double(den); }
};

// Exact forward pipeline for the quartet fixture, fully independent of the
// library's transforms: joint by enumeration, superset sums for λ, centered
// expansion for μ, and the hand-expanded quartet cumulant relations
// κ_I = μ_I (|I| <= 3), κ_1234 = μ_1234 - μ_12 μ_34.
struct ExactQuartet {
    std::array<Rat, 16> p;
    std::array<Rat, 16> lambda;
    std::array<Rat, 16> mu;
    std::array<Rat, 16> kappa;

    ExactQuartet() {
        // node order r,1,2,a,3,4 with the fixture's conditionals in tenths
        Rat root1(8, 10);
        auto c10 = [&](int child) {
            (void)child;
            return Rat(3, 10);
        };
        auto c11 = [&](int child) {
            // children 1 and a copy strongly, the rest weakly
            return (child == 1 || child == 3) ? Rat(8, 10) : Rat(7, 10);
        };
        auto one_minus = [](Rat x) { return Rat(1) - x; };

        for (int a1 = 0; a1 < 2; ++a1)
            for (int a2 = 0; a2 < 2; ++a2)
                for (int a3 = 0; a3 < 2; ++a3)
                    for (int a4 = 0; a4 < 2; ++a4) {
                        Rat total(0);
                        for (int hr = 0; hr < 2; ++hr)
                            for (int ha = 0; ha < 2; ++ha) {
                                Rat term = hr ? root1 : one_minus(root1);
                                auto edge = [&](int child, int parent_state, int state) {
                                    Rat t1 = parent_state ? c11(child) : c10(child);
                                    return state ? t1 : one_minus(t1);
                                };
                                term = term * edge(1, hr, a1); // leaf 1
                                term = term * edge(2, hr, a2); // leaf 2
                                term = term * edge(3, hr, ha); // inner a
                                term = term * edge(4, ha, a3); // leaf 3
                                term = term * edge(4, ha, a4); // leaf 4
                                total = total + term;
                            }
                        p[a1 | (a2 << 1) | (a3 << 2) | (a4 << 3)] = total;
                    }

        for (int al = 0; al < 16; ++al) {
            Rat sum(0);
            for (int be = 0; be < 16; ++be)
                if ((be & al) == al) sum = sum + p[be];
            lambda[al] = sum;
        }
        std::array<Rat, 4> means{lambda[1], lambda[2], lambda[4], lambda[8]};
        for (int al = 0; al < 16; ++al) {
            Rat acc(0);
            for (int be = 0; be < 16; ++be) {
                Rat term = p[be];
                for (int i = 0; i < 4; ++i)
                    if ((al >> i) & 1)
                        term = term * (Rat(((be >> i) & 1) ? 1 : 0) - means[i]);
                acc = acc + term;
            }
            mu[al] = acc;
        }
        for (int al = 0; al < 16; ++al) kappa[al] = (al == 15 || __builtin_popcount(al) < 2)
                                                        ? Rat(0)
                                                        : mu[al];
        kappa[15] = mu[15] - mu[3] * mu[12]; // μ_1234 - μ_12 μ_34
    }
};

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0;
    for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

inline latree::ProbabilityTable random_table(int n, std::mt19937_64& rng) {
    latree::ProbabilityTable p = latree::make_table(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double sum = 0;
    for (auto& x : p.values) sum += (x = u(rng) + 1e-4);
    for (auto& x : p.values) x /= sum;
    return p;
}

} // namespace tsupport
