"""Independent high-precision reference values frozen into the C++ tests.

Run with: python3 tools/oracles.py
"""
import mpmath as mp

mp.mp.dps = 40


def farima_C(d):
    return 1 / (mp.beta(d, 2 - 2 * d) + mp.beta(d + 1, 2 - 2 * d))


def beta_cov(p, q, s2, t):
    return s2 * mp.gamma(q - 1) / mp.beta(p, q) * mp.gamma(p + mp.mpf(t) / 2) / mp.gamma(p + mp.mpf(t) / 2 + q - 1)


def canon_cov(beta, s2, t):
    # int_0^1 x^t (1+beta)(1-x)^beta / (1-x^2) dx, with u = 1 - x
    f = lambda u: (1 - u) ** t * (1 + beta) * u ** (beta - 1) / (2 - u)
    return s2 * mp.quad(f, [0, mp.mpf(1) / t, mp.mpf(10) / t, mp.mpf(100) / t, 1])


def canon_spec(beta, s2, y):
    s = 4 * mp.sin(y / 2) ** 2
    f = lambda u: (1 + beta) * u ** beta / (u ** 2 + (1 - u) * s)
    return s2 / (2 * mp.pi) * mp.quad(f, [0, mp.sqrt(s) / 10, mp.sqrt(s), 10 * mp.sqrt(s), 1])


def farima_spec(d, y):
    C = farima_C(d)
    s2 = mp.sin(mp.pi * d) / (mp.pi * C)
    s = 4 * mp.sin(y / 2) ** 2
    # x = v^(1/d) removes the x^(d-1) singularity at the origin
    def g(v):
        x = v ** (1 / d)
        return C / d * (1 - x) ** (1 - 2 * d) * (1 + x) / ((1 - x) ** 2 + x * s)
    return s2 / (2 * mp.pi) * mp.quad(g, [0, 0.5, 0.9, 0.99, 0.999, 1])


print("farima C(d):", {d: mp.nstr(farima_C(mp.mpf(d)), 17) for d in ("0.1", "0.25", "0.4")})
print("BetaType(1,1.5) cov t=0..5:", [mp.nstr(beta_cov(1, 1.5, 1, t), 17) for t in range(6)])
print("BetaType(1,1.5) moments k=0..5:", [mp.nstr(mp.beta(1 + mp.mpf(k) / 2, 1.5) / mp.beta(1, 1.5), 17) for k in range(6)])
print("BetaType(2,3) moments k=0..5:", [mp.nstr(mp.beta(2 + mp.mpf(k) / 2, 3) / mp.beta(2, 3), 17) for k in range(6)])
print("c_f integral beta=0.5:", mp.nstr(mp.quad(lambda w: w ** 0.5 / (w * w + 1), [0, 1, mp.inf]), 17))
for b in (0.2, 0.5, 0.8):
    print("canonical beta", b, "gamma(1e4):", mp.nstr(canon_cov(mp.mpf(b), 1, 10 ** 4), 17),
          "f(1e-3):", mp.nstr(canon_spec(mp.mpf(b), 1, mp.mpf("1e-3")), 17))
for d in ("0.1", "0.25", "0.4"):
    d = mp.mpf(d)
    y = mp.mpf("0.7")
    print("farima d", d, "mixture f(0.7) / target:", mp.nstr(farima_spec(d, y) / ((2 * mp.pi) ** -1 * abs(2 * mp.sin(y / 2)) ** (-2 * d)), 17))

# 4N Green function at a = 0.5: sum of g^2 = (2 pi)^-2 int |1/(1 - a zhat)|^2 over the torus;
# the integrand is analytic and periodic, so the trapezoid rule converges geometrically.
import numpy as np

M = 512
w = 2 * np.pi * np.arange(M) / M
W1, W2 = np.meshgrid(w, w, indexing="ij")
zhat = 0.5 * (np.cos(W1) + np.cos(W2))
print("4N sum g^2 at a=0.5:", repr(float(np.mean(1.0 / (1.0 - 0.5 * zhat) ** 2))))
