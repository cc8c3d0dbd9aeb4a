#!/usr/bin/env python3
"""Regenerates tests/reference/reference_values.hpp.

Independent reference values for the C++ unit tests, computed with
scipy/mpmath (and numpy for the Philox vectors). Keep this script free of
any dependency on the C++ code so the two routes stay independent.
"""

import io

import mpmath as mp
import numpy as np
from scipy import integrate, special

mp.mp.dps = 40

OUT = "tests/reference/reference_values.hpp"


def cxx(x, digits=17):
    return mp.nstr(mp.mpf(x), digits, strip_zeros=False)


lines = io.StringIO()
w = lines.write
w("// Auto-generated by generate_reference_values.py; do not edit by hand.\n")
w("// Reference values computed independently with scipy %s / mpmath %s.\n" % (
    __import__("scipy").__version__, mp.__version__))
w("#pragma once\n#include <cstdint>\n\nnamespace refvals {\n\n")

# ---------------------------------------------------------------- Philox ---
# Direct block outputs of Philox4x64-10, cross-checked against
# numpy.random.Philox (numpy buffers blocks with a pre-incremented counter;
# the vectors below are for the raw (counter, key) -> block function).
M64 = (1 << 64) - 1
PHILOX_M0, PHILOX_M1 = 0xD2E7470EE14C6C93, 0xCA5A826395121157
PHILOX_W0, PHILOX_W1 = 0x9E3779B97F4A7C15, 0xBB67AE8584CAA73B


def philox4x64(ctr, key):
    c, k = list(ctr), list(key)
    for r in range(10):
        if r > 0:
            k[0] = (k[0] + PHILOX_W0) & M64
            k[1] = (k[1] + PHILOX_W1) & M64
        hi0, lo0 = divmod(PHILOX_M0 * c[0], 1 << 64)
        hi1, lo1 = divmod(PHILOX_M1 * c[2], 1 << 64)
        c = [(hi1 ^ c[1] ^ k[0]) & M64, lo1, (hi0 ^ c[3] ^ k[1]) & M64, lo0]
    return c


philox_cases = [
    ((0, 0, 0, 0), (0, 0)),
    ((1, 0, 0, 0), (0, 0)),
    ((0, 1, 0, 0), (0, 0)),
    ((0, 0, 1, 0), (0, 0)),
    ((0, 0, 0, 1), (0, 0)),
    ((0xFFFFFFFFFFFFFFFF,) * 4, (0xFFFFFFFFFFFFFFFF,) * 2),
    ((0x243F6A8885A308D3, 0x13198A2E03707344,
      0xA4093822299F31D0, 0x082EFA98EC4E6C89),
     (0x452821E638D01377, 0xBE5466CF34E90C6C)),
    ((0, 0, 0, 0), (0x123456789ABCDEF0, 0)),
]
numpy_check = philox4x64((1, 0, 0, 0), (0, 0))
assert [hex(v) for v in numpy_check] == [
    hex(x) for x in np.random.Philox(key=0).random_raw(4)]

w("struct PhiloxCase { uint64_t ctr[4]; uint64_t key[2]; uint64_t out[4]; };\n")
w("inline constexpr PhiloxCase philox_cases[] = {\n")
for ctr, key in philox_cases:
    out = philox4x64(ctr, key)
    w("    {{%s}, {%s}, {%s}},\n" % (
        ", ".join("0x%016xull" % v for v in ctr),
        ", ".join("0x%016xull" % v for v in key),
        ", ".join("0x%016xull" % v for v in out)))
w("};\n\n")

# ----------------------------------------------------- special functions ---
w("// digamma / trigamma spot values.\n")
for name, fn in [("digamma", mp.digamma), ("trigamma", lambda x: mp.zeta(2, x))]:
    pts = [0.25, 0.5, 1.0, 1.5, 2.0, 5.0, 11.0, 123.75]
    w("inline constexpr double %s_pts[] = {%s};\n" % (
        name, ", ".join(cxx(p) for p in pts)))
    w("inline constexpr double %s_vals[] = {%s};\n" % (
        name, ", ".join(cxx(fn(mp.mpf(p))) for p in pts)))

w("\n// lerch_phi(z, 1, a) spot values (series definition sum z^n/(n+a)).\n")
lerch_cases = [(0.0, 1.0), (0.5, 1.0), (2.0 / 3.0, 1.0), (0.9, 2.5),
               (11.0 / 12.0, 5.0), (0.999, 5.0), (0.3, 0.25)]
w("struct LerchCase { double z, a, value; };\n")
w("inline constexpr LerchCase lerch_cases[] = {\n")
for z, a in lerch_cases:
    v = mp.re(mp.lerchphi(mp.mpf(z), 1, mp.mpf(a)))
    w("    {%s, %s, %s},\n" % (cxx(z), cxx(a), cxx(v)))
w("};\n\n")

w("// Regularized incomplete beta I_x(a, b) spot values.\n")
ibeta_cases = [(1, 2, 0.5), (2, 1, 0.2), (5, 6, 0.3333333333333333),
               (6, 5, 0.9), (5, 6, 0.999), (0.5, 0.5, 0.25), (7, 4, 0.6),
               (11, 10, 0.5)]
w("struct IBetaCase { double a, b, x, value; };\n")
w("inline constexpr IBetaCase ibeta_cases[] = {\n")
for a, b, x in ibeta_cases:
    v = mp.betainc(a, b, 0, x, regularized=True)
    w("    {%s, %s, %s, %s},\n" % (cxx(a), cxx(b), cxx(x), cxx(v)))
w("};\n\n")

# --------------------------------------------------------------- models ----
w("// Kullback-Leibler numbers E_post[log lr(X)] by adaptive quadrature\n")
w("// over the observation densities (independent of any closed form).\n")


def kl_quad(f, g, lo, hi):
    def integrand(x):
        gx = g(x)
        return 0.0 if gx == 0.0 else gx * np.log(gx / f(x))

    val, err = integrate.quad(integrand, lo, hi, limit=800,
                              epsabs=1e-13, epsrel=1e-13)
    assert err < 1e-9, err
    return val


def beta_pdf(a, b):
    return lambda x: x ** (a - 1) * (1 - x) ** (b - 1) / special.beta(a, b)


kl_vals = {
    "u2b": kl_quad(lambda x: 1.0, lambda x: 2.0 * x, 0, 1),
    "exp_double": kl_quad(lambda x: np.exp(-x), lambda x: 2 * np.exp(-2 * x),
                          0, np.inf),
    "beta_d1": kl_quad(beta_pdf(1, 2), beta_pdf(2, 1), 0, 1),
    "beta_d5": kl_quad(beta_pdf(5, 6), beta_pdf(6, 5), 0, 1),
    "beta_d05": kl_quad(beta_pdf(0.5, 1.5), beta_pdf(1.5, 0.5), 0, 1),
    "exp_shift_01": kl_quad(lambda x: np.exp(-x),
                            lambda x: np.exp(-x / 1.1) / 1.1, 0, np.inf),
}
for k, v in kl_vals.items():
    w("inline constexpr double kl_%s = %s;\n" % (k, cxx(v, 15)))

w("\n// Likelihood-ratio CDF spot values for ExpShift(theta=0.1), computed\n")
w("// by quadrature of the observation density over {x : lr(x) <= t}.\n")


def expshift_lr_cdf(t, theta, post):
    # lr(x) = exp(x*theta/(1+theta))/(1+theta), increasing in x.
    if t * (1 + theta) <= 1:
        return 0.0
    xcut = np.log(t * (1 + theta)) * (1 + theta) / theta
    if post:
        return 1.0 - np.exp(-xcut / (1 + theta))
    return 1.0 - np.exp(-xcut)


w("struct LrCdfCase { double t, pre, post; };\n")
w("inline constexpr LrCdfCase expshift01_lr_cdf[] = {\n")
for t in [0.92, 1.0, 1.5, 4.0, 50.0]:
    w("    {%s, %s, %s},\n" % (cxx(t), cxx(expshift_lr_cdf(t, 0.1, False)),
                               cxx(expshift_lr_cdf(t, 0.1, True))))
w("};\n\n")

# ------------------------------------------------- asymptotic constants ----
w("// Constants for the Beta2Beta family:\n")
w("//   kl(delta)      = 1/delta\n")
w("//   z1sq(delta)    = 2*trigamma(delta)\n")
w("//   cinf(delta)    = delta*trigamma(delta) + digamma(delta) - digamma(1)\n")
w("//   c_of_r(delta)  = lerch_phi(r/(1+r),1,delta) + digamma(delta) - digamma(1)\n")
w("//   rstar(delta)   : lerch_phi(r/(1+r),1,delta) = delta*trigamma(delta)\n")


def cinf(d):
    return d * mp.zeta(2, d) + mp.digamma(d) - mp.digamma(1)


def rstar(d):
    target = d * mp.zeta(2, d)
    f = lambda z: mp.re(mp.lerchphi(z, 1, d)) - target
    lo, hi = mp.mpf("0.01"), mp.mpf("0.9999")
    for _ in range(200):
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    z = (lo + hi) / 2
    return z / (1 - z)


for d in (1, 5):
    w("inline constexpr double beta_cinf_d%d = %s;\n" % (d, cxx(cinf(d))))
    w("inline constexpr double beta_rstar_d%d = %s;\n" % (d, cxx(rstar(d))))
    w("inline constexpr double beta_z1sq_d%d = %s;\n" % (d, cxx(2 * mp.zeta(2, d))))
w("inline constexpr double beta_c_of_r2_d1 = %s;\n" %
  cxx(mp.re(mp.lerchphi(mp.mpf(2) / 3, 1, 1))))
w("inline constexpr double beta_c_of_r11_d5 = %s;\n" %
  cxx(mp.re(mp.lerchphi(mp.mpf(11) / 12, 1, 5)) + mp.digamma(5) - mp.digamma(1)))

# -------------------------------------- uniform(0,1) -> beta(2,1) model ----
w("\n// Closed-form operating characteristics for the uniform->beta model\n")
w("// (lr cdfs t/2 and (t/2)^2 on [0,2)), derived from the rank-one kernel\n")
w("// factorization; used to pin the exact-solver regression tests.\n")
gbar = 1 / (1 - mp.log(3) / 2)
w("inline constexpr double u2b_gamma_bar = %s;\n" % cxx(gbar))


def u2b_exact(gamma):
    g = mp.mpf(gamma)
    f = lambda A: A + (g - 1) * mp.sqrt(1 + A) * mp.log(1 + A) \
        - 2 * (g - 1) * mp.sqrt(1 + A)
    A = mp.findroot(f, mp.mpf("1.0"))
    r = mp.sqrt(1 + A) - 1
    lam = mp.log(1 + A) / 2
    ell = lambda x: 1 + (A / 2) / ((1 - lam) * (1 + x))
    D0 = 1 - lam + A / (2 * (1 + A))
    d0 = lambda x: 1 + (A ** 2 / 4) / (D0 * (1 + x) ** 2)
    jp_srr = d0(r)
    # psi = d0 + M/(1+x) with M = (int d0 * Y')/(1 - int X Y')
    int_d0 = A / 2 + (A ** 2 / 8) * (A / (1 + A)) / D0
    Mpsi = int_d0 / (1 - lam)
    psi = lambda x: d0(x) + Mpsi / (1 + x)
    jb = (r * d0(r) + psi(r)) / (r + ell(r))
    B = mp.e ** (2 * (1 - 1 / g)) - 1
    lamB = mp.log(1 + B) / 2
    D0B = 1 - lamB + B / (2 * (1 + B))
    jp_srp = 1 + (B ** 2 / 4) / (D0B * (1 + B))
    assert mp.almosteq(ell(r), g, rel_eps=mp.mpf("1e-30"))
    assert mp.almosteq(1 / (1 - lamB), g, rel_eps=mp.mpf("1e-30"))
    return A, r, B, jp_srr, jp_srp, jb


w("struct U2bCase { double gamma, A, r, B, jp_srr, jp_srp, jb; };\n")
w("inline constexpr U2bCase u2b_cases[] = {\n")
for gamma in ["1.2", "1.5", "1.8", "2.1"]:
    A, r, B, jp_srr, jp_srp, jb = u2b_exact(mp.mpf(gamma))
    w("    {%s, %s, %s, %s, %s, %s, %s},\n" % (
        gamma, cxx(A), cxx(r), cxx(B), cxx(jp_srr), cxx(jp_srp), cxx(jb)))
w("};\n\n")

w("}  // namespace refvals\n")

with open(OUT, "w") as fh:
    fh.write(lines.getvalue())
print("wrote", OUT)
