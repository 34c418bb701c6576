"""Independent high-precision recomputation of the scalar golden values
frozen into tests/test_bounds.cpp. Run: python3 bounds_oracle.py"""
from mpmath import mp, mpf, log, sqrt, exp, ceil, floor, findroot, asin

mp.dps = 40
S2 = sqrt(2)


def h(p):
    p = mpf(p)
    if p == 0 or p == 1:
        return mpf(0)
    return -p * log(p, 2) - (1 - p) * log(1 - p, 2)


def rate(p, f):
    p = mpf(p)
    return 1 - h((2 + S2) * p) - f * h(p)


def mu_prime(n, ls, eps):
    n, ls, eps = mpf(n), mpf(ls), mpf(eps)
    return (4 * sqrt(3) * (1 + S2) + sqrt((n + ls) * (ls + 1) / (n * ls))) * sqrt(log(6 / eps) / ls)


def key_length(n, q, delta, S0, eps, eps_cor, l_syn):
    n, q, delta = mpf(n), mpf(q), mpf(delta)
    N = ceil(n / (1 - delta) / (1 - q) ** 2)
    ls = ceil(n * (q / (1 - q)) ** 2)
    mp_ = mu_prime(n, ls, eps)
    arg = (1 + S2) * (1 / S2 - mpf(S0)) + mp_
    l = n * (1 - h(arg)) - 2 * ls - l_syn - log(1 / mpf(eps_cor), 2) - 2 * log(3 / mpf(eps), 2)
    return N, ls, mp_, arg, l


print("h(0.11)            =", h("0.11"))
print("R(0.02,1)          =", rate("0.02", 1))
print("qber_threshold(1)  =", findroot(lambda p: rate(p, 1), (mpf("0.04"), mpf("0.06")), solver="anderson"))
print("qber_threshold(1.2)=", findroot(lambda p: rate(p, mpf("1.2")), (mpf("0.03"), mpf("0.06")), solver="anderson"))
print("dd root f=1        =", findroot(lambda p: 1 - 2 * h(p), (mpf("0.1"), mpf("0.12")), solver="anderson"))
print("mu'(1e6,1e4,1e-9)  =", mu_prime(10**6, 10**4, mpf("1e-9")))
lsyn = ceil(1 * 10**6 * h("0.01"))
print("l_syn(1e6, 0.01)   =", lsyn)
N, ls, mpv, arg, l = key_length(10**6, "0.1", "0.01", "0.69", mpf("1e-9"), mpf("1e-9"), lsyn)
print("keylength example: N =", N, "l_smp =", ls, "mu' =", mpv, "arg =", arg, "l =", l, "floor =", floor(l))
print("flip amplitude knee phi =", asin(1 / (2 * (1 + S2))))
print("chernoff simple expression (d=q=0.1) =", 2 * exp(-(mpf("0.01")) ** 2 / 2))
print("azuma(4800, 0.1) =", exp(-4800 * mpf("0.01") / 48))

# Second configuration with a non-vacuous phase-error argument.
lsyn2 = ceil(1 * 10**10 * h("0.01"))
N, ls, mpv, arg, l = key_length(10**10, "0.1", "0.01", "0.70", mpf("1e-9"), mpf("1e-9"), lsyn2)
print("keylength example 2: l_syn =", lsyn2, "N =", N, "l_smp =", ls, "mu' =", mpv, "arg =", arg, "l =", l, "floor =", floor(l))
