"""Independent oracle for the frozen test fixtures in tests/fixtures.rs.

Runs in mpmath at 30 digits, independently of the Rust quadrature and
finite-difference code. Prints Rust constants; paste them into the fixture
file when regenerating.

    python3 derive_fixtures.py
"""

import mpmath as mp

mp.mp.dps = 30


def stieltjes_kernel_break(n_max=6):
    # J_n = ∫ x^n sin(2π ln x) e^{-x²/2} dLN(0,1), in y = ln x
    def j(n):
        f = lambda y: mp.exp(n * y) * mp.sin(2 * mp.pi * y) * mp.exp(-mp.exp(2 * y) / 2) * mp.npdf(y)
        return mp.quad(f, mp.linspace(-14, 5, 39))

    return [j(n) for n in range(n_max + 1)]


def gaussian_w(j, mu, sigma, s):
    f = lambda x: x**j * mp.npdf(x, mu, sigma) * mp.npdf(x, 0, s)
    width = max(sigma, mp.mpf(1)) * 40
    return mp.quad(f, mp.linspace(mu - width, mu + width, 41))


def singular_limit(theta=(1, 1), orders=(0, 1, 2), scales=(1, 2, 5, 10, 30, 100)):
    mu, sigma = (mp.mpf(t) for t in theta)
    rows = []
    for s in scales:
        s = mp.mpf(s)
        jac = mp.matrix(len(orders), 2)
        for r, j in enumerate(orders):
            jac[r, 0] = mp.diff(lambda m: gaussian_w(j, m, sigma, s), mu)
            jac[r, 1] = mp.diff(lambda v: gaussian_w(j, mu, v, s), sigma)
        g = jac.T * jac
        det = mp.det(g)
        ev = sorted(mp.eigsy(g)[0])
        cond = ev[-1] / ev[0]
        corr = det / (g[0, 0] * g[1, 1])
        rows.append((s, det, cond, corr))
    return rows


def tilted_gaussian(mu, sigma, s, c):
    # tilted law of N(mu, sigma²)·N(c, s²), by quadrature
    dens = lambda x: mp.npdf(x, mu, sigma) * mp.npdf(x, c, s)
    pts = mp.linspace(mu - 40 * sigma, mu + 40 * sigma, 41)
    w0 = mp.quad(dens, pts)
    mean = mp.quad(lambda x: x * dens(x), pts) / w0
    var = mp.quad(lambda x: (x - mean) ** 2 * dens(x), pts) / w0
    v = sigma**2 + s**2
    closed_mean = (mu * s**2 + c * sigma**2) / v
    closed_var = sigma**2 * s**2 / v
    assert abs(mean - closed_mean) < mp.mpf(10) ** -25
    assert abs(var - closed_var) < mp.mpf(10) ** -25
    return w0, mean, var


def f(x):
    return mp.nstr(x, 20)


if __name__ == "__main__":
    print("pub const STIELTJES_KERNEL_BREAK: [f64; 7] = [")
    for v in stieltjes_kernel_break():
        print(f"    {f(v)},")
    print("];")
    print("// (s, det G, cond G, correlation det) at gaussian θ = (1, 1), orders 0..=2")
    print("pub const SINGULAR_LIMIT: [[f64; 4]; 6] = [")
    for row in singular_limit():
        print("    [" + ", ".join(f(v) for v in row) + "],")
    print("];")
    w0, mean, var = tilted_gaussian(mp.mpf("0.7"), mp.mpf("1.3"), mp.mpf("0.9"), mp.mpf("0.2"))
    print("// gaussian(0.7, 1.3) under kernel s=0.9, c=0.2: (w0, κ1, κ2)")
    print(f"pub const TILTED_GAUSSIAN: [f64; 3] = [{f(w0)}, {f(mean)}, {f(var)}];")
