"""Independent high-precision reference values for the Rayleigh fixtures.

G ~ Rayleigh(1), so X = G^2 is exponential with mean 2. Every quantity is
a one-dimensional integral over X evaluated with mpmath; multipliers are
found with mpmath's root finder. Nothing here shares code with the C++
library.
"""
import mpmath as mp

mp.mp.dps = 30
SIGMA2 = mp.mpf("0.25")
P = mp.mpf(1)


def density(x):
    return mp.exp(-x / 2) / 2


def expect(f, lo=0, kink=None):
    points = [lo, lo + 1, lo + 10, mp.inf]
    if kink is not None and kink > lo:
        points = sorted(set(points + [kink]))
    return mp.quad(lambda x: f(x) * density(x), points)


def c_bits(snr):
    return mp.log(1 + snr) / (2 * mp.log(2))


def v_uu(lam):
    noise = lam + SIGMA2
    a = noise / P
    # E[1/2 log2(1 + X/a)] with X ~ Exp(mean 2): e^{a/2} E1(a/2) / (2 ln 2).
    return mp.exp(a / 2) * mp.e1(a / 2) / (2 * mp.log(2))


def v_tx(lam):
    noise = lam + SIGMA2

    def spent(level):
        return expect(lambda x: level - noise / x, noise / level)

    level = mp.findroot(lambda l: spent(l) - P, (mp.mpf("0.5"), mp.mpf(3)), solver="anderson")
    return expect(lambda x: c_bits(x * level / noise - 1), noise / level), level


def psi_jam(x, mult):
    root = mp.sqrt(x * x * P * P + 2 * x * P / mult)
    return max(mp.mpf(0), (-2 * SIGMA2 - x * P + root) / 2)


def v_jam(lam):
    def onset(mult):
        # Smallest X at which the jammer transmits.
        return 4 * SIGMA2**2 / (P * (2 / mult - 4 * SIGMA2)) if 2 / mult > 4 * SIGMA2 else None

    def spent(log_mult):
        mult = mp.exp(log_mult)
        start = onset(mult)
        if start is None:
            return -lam
        return expect(lambda x: psi_jam(x, mult), start) - lam

    log_mult = mp.findroot(spent, (mp.mpf(-6), mp.mpf(1)), solver="anderson")
    mult = mp.exp(log_mult)
    value = expect(lambda x: c_bits(x * P / (psi_jam(x, mult) + SIGMA2)), 0, onset(mult))
    return value, mult


if __name__ == "__main__":
    for lam in ("0.75", "1"):
        lam = mp.mpf(lam)
        print(f"Lambda={lam}: V_UU={mp.nstr(v_uu(lam), 18)}")
        value, level = v_tx(lam)
        print(f"Lambda={lam}: V_TX={mp.nstr(value, 18)} (water level {mp.nstr(level, 12)})")
        value, mult = v_jam(lam)
        print(f"Lambda={lam}: V_JAM={mp.nstr(value, 18)} (multiplier {mp.nstr(mult, 12)})")
