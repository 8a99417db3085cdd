"""Freezes high-precision reference values into oracles.inc.

Everything here is computed with mpmath at 40 significant digits straight
from the defining formulas, independently of the C++ implementation.
Rerun after changing a point list:  python3 tests/oracles/generate.py
"""

import pathlib

import mpmath as mp

mp.mp.dps = 40


def phi(x):
    return mp.npdf(x)


def Phi(x):
    return mp.ncdf(x)


def fmt(x):
    x = mp.mpf(x)
    if x != 0 and abs(x) < mp.mpf("1e-300"):
        return "0.0"  # below the double range; tests skip these entries
    return mp.nstr(x, 25, min_fixed=-5, max_fixed=5)


SCALAR_X = ["-40", "-30", "-20", "-12", "-10.5", "-10", "-9.5", "-5", "-1.25", "0", "0.5",
            "1", "3", "5.5", "8", "10", "20", "38"]
QUANTILE_P = ["1e-300", "1e-10", "0.001", "0.025", "0.3", "0.5", "0.975", "0.999999999999"]
CHI2 = [("3.841458820694124", 1), ("28.16", 3), ("0.5", 2), ("100", 10), ("0.001", 4),
        ("12.5", 7), ("400", 3)]

MOMENT_POINTS = [(mu1, mu2, sigma, rho)
                 for mu1 in ("0.3",)
                 for mu2 in ("-2.5", "0", "1.5")
                 for sigma in ("0.7", "1.8")
                 for rho in ("-0.8", "0.3")] + [("1", "-6", "1.2", "0.5"), ("-1", "4", "0.5", "-0.95")]

# Small fixed dataset for loglik / score oracles: p = 2, q = 3, r = 2, s = 2.
X = [[1, 0.4], [1, -1.2], [1, 0.9], [1, 2.1], [1, -0.3], [1, 0.0]]
W = [[1, 0.4, 1.5], [1, -1.2, -0.7], [1, 0.9, 0.2], [1, 2.1, -1.1], [1, -0.3, 0.8], [1, 0.0, -2.0]]
E = [[1, 0.5], [1, -0.8], [1, 1.1], [1, 0.0], [1, -1.5], [1, 0.3]]
V = [[1, -0.6], [1, 1.4], [1, 0.2], [1, -1.0], [1, 0.7], [1, 2.5]]
Y = [1.7, 0.0, 2.4, 3.9, 0.0, -0.4]
U = [1, 0, 1, 1, 0, 1]
THETA = [0.8, 0.6, 0.3, 0.9, -0.5, -0.2, 0.35, 0.4, -0.7]


def loglik(theta):
    beta, gamma, lam, kap = theta[0:2], theta[2:5], theta[5:7], theta[7:9]
    total = mp.mpf(0)
    for i in range(len(Y)):
        dot = lambda a, b: sum(mp.mpf(x) * y for x, y in zip(a, b))
        mu1, mu2 = dot(X[i], beta), dot(W[i], gamma)
        sigma, rho = mp.exp(dot(E[i], lam)), mp.tanh(dot(V[i], kap))
        if U[i]:
            z = (mp.mpf(Y[i]) - mu1) / sigma
            zeta = (mu2 + rho * z) / mp.sqrt(1 - rho**2)
            total += mp.log(Phi(zeta)) + mp.log(phi(z)) - mp.log(sigma)
        else:
            total += mp.log(Phi(-mu2))
    return total


def moments(mu1, mu2, sigma, rho):
    mu1, mu2, sigma, rho = map(mp.mpf, (mu1, mu2, sigma, rho))
    root = mp.sqrt(1 - rho**2)
    sel = Phi(mu2)

    def expect(g):
        # Conditional density of Z = (Y - mu1) / sigma given selection.
        f = lambda z: phi(z) * Phi((mu2 + rho * z) / root) / sel * g(z)
        return mp.quad(f, [-mp.inf, -10, -3, 0, 3, 10, mp.inf])

    zeta = lambda z: (mu2 + rho * z) / root
    mills = lambda z: phi(zeta(z)) / Phi(zeta(z))
    return [mu1 + sigma * expect(lambda z: z), expect(lambda z: z), expect(lambda z: z * z),
            expect(mills), expect(lambda z: zeta(z) * mills(z)), expect(lambda z: mills(z) ** 2)]


def main():
    lines = ["// Generated by tests/oracles/generate.py (mpmath, 40 digits). Do not edit.", ""]
    lines.append("struct ScalarOracle { double x, log_pdf, cdf, log_cdf, inv_mills; };")
    lines.append("inline constexpr ScalarOracle kScalarOracles[] = {")
    for xs in SCALAR_X:
        x = mp.mpf(xs)
        lines.append(f"    {{{xs}, {fmt(mp.log(phi(x)))}, {fmt(Phi(x))}, {fmt(mp.log(Phi(x)))}, "
                     f"{fmt(phi(x) / Phi(x))}}},")
    lines.append("};")
    lines.append("")
    lines.append("struct QuantileOracle { double p, x; };")
    lines.append("inline constexpr QuantileOracle kQuantileOracles[] = {")
    for ps in QUANTILE_P:
        p = mp.mpf(float(ps))  # the double the C++ literal denotes
        x = mp.findroot(lambda t: Phi(t) - p, mp.sqrt(2) * mp.erfinv(2 * p - 1) if p > 1e-200 else -37)
        lines.append(f"    {{{ps}, {fmt(x)}}},")
    lines.append("};")
    lines.append("")
    lines.append("struct ChiSquareOracle { double x; int df; double sf; };")
    lines.append("inline constexpr ChiSquareOracle kChiSquareOracles[] = {")
    for xs, df in CHI2:
        sf = mp.gammainc(mp.mpf(df) / 2, mp.mpf(xs) / 2, mp.inf, regularized=True)
        lines.append(f"    {{{xs}, {df}, {fmt(sf)}}},")
    lines.append("};")
    lines.append("")
    lines.append("struct MomentOracle {\n  double mu1, mu2, sigma, rho;\n"
                 "  double ey, ez, ez2, emills, ezeta_mills, psi;\n};")
    lines.append("inline constexpr MomentOracle kMomentOracles[] = {")
    for pt in MOMENT_POINTS:
        vals = moments(*pt)
        lines.append("    {" + ", ".join(pt) + ",\n     " + ", ".join(fmt(v) for v in vals) + "},")
    lines.append("};")
    lines.append("")

    def arr(name, rows):
        flat = ", ".join(str(v) for row in rows for v in row)
        return f"inline constexpr double {name}[] = {{{flat}}};"

    lines.append("// Six-observation dataset, row-major designs.")
    lines.append("inline constexpr int kTinyN = 6;")
    lines.append(arr("kTinyX", X))
    lines.append(arr("kTinyW", W))
    lines.append(arr("kTinyE", E))
    lines.append(arr("kTinyV", V))
    lines.append(arr("kTinyY", [Y]))
    lines.append("inline constexpr int kTinyU[] = {" + ", ".join(map(str, U)) + "};")
    lines.append(arr("kTinyTheta", [THETA]))
    theta = [mp.mpf(str(t)) for t in THETA]
    lines.append(f"inline constexpr double kTinyLoglik = {fmt(loglik(theta))};")
    score = []
    for j in range(len(theta)):
        def partial(t, j=j):
            th = list(theta)
            th[j] = t
            return loglik(th)
        score.append(mp.diff(partial, theta[j]))
    lines.append("inline constexpr double kTinyScore[] = {" + ", ".join(fmt(s) for s in score) + "};")
    lines.append("")

    out = pathlib.Path(__file__).with_name("oracles.inc")
    out.write_text("\n".join(lines))


if __name__ == "__main__":
    main()
