"""Regenerate oracles.json with mpmath, independently of the package code.

    python tests/oracles/generate_oracles.py

Nothing here imports ``motional``: characteristic functions come from
oscillatory quadrature of the densities (or mpmath's own Bessel K), Laplace
transforms from direct quadrature, and pole rates from root finding on
those transforms.
"""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 30
OUT = Path(__file__).with_name("oracles.json")


def student_pdf(r):
    norm = mp.gamma((r + 1) / 2) / (mp.sqrt(r * mp.pi) * mp.gamma(r / 2))
    return lambda x: norm * (1 + x * x / r) ** (-(r + 1) / 2)


def student_char_quadosc(r, t):
    pdf = student_pdf(r)
    return 2 * mp.quadosc(lambda x: pdf(x) * mp.cos(t * x), [0, mp.inf], omega=t)


def student_char_bessel(r, T):
    mu = mp.mpf(r) / 2
    z = mp.sqrt(r) * T
    return 2 ** (1 - mu) / mp.gamma(mu) * z ** mu * mp.besselk(mu, z)


def student_laplace(r, u):
    return mp.quad(lambda T: mp.exp(-u * T) * student_char_bessel(r, T), [0, 1, 10, mp.inf])


def pole_rate(r, G):
    f = lambda g: G * student_laplace(r, G - g) - 1
    return mp.findroot(f, (mp.mpf(0.2) * G ** 0.5, mp.mpf(0.9) * G ** 0.5), solver="secant")


def truncated_char(r, dc, t):
    pdf = student_pdf(r)
    n = max(8, int(dc * t / mp.pi) + 1)
    pts = mp.linspace(0, dc, n + 1)
    mass = 2 * mp.quad(pdf, [0, 1, dc])
    return 2 * mp.quad(lambda x: pdf(x) * mp.cos(t * x), pts) / mass


def main():
    data = {"student_char": [], "gaussian_laplace": [], "student_laplace": [],
            "pole_rates": [], "truncated_char": []}
    for r in (0.5, 0.75, 1.0, 1.5, 3.0):
        for t in (0.01, 0.1, 0.5, 1.0, 2.0, 5.0):
            data["student_char"].append({"r": r, "t": t,
                                         "value": float(student_char_quadosc(r, t))})
    c = mp.mpf(1) / 2
    for s in (mp.mpc(1, 0), mp.mpc(1, 2), mp.mpc(0.1, -3)):
        v = mp.quad(lambda T: mp.exp(-s * T - c * T * T), [0, 2, 6, mp.inf])
        data["gaussian_laplace"].append({"c": float(c), "s": [float(s.real), float(s.imag)],
                                         "value": [float(v.real), float(v.imag)]})
    for r in (0.5, 1.5):
        for u in (mp.mpc(1, 0), mp.mpc(0.5, 2), mp.mpc(2, -5), mp.mpc(1e-3, 1)):
            v = student_laplace(r, u)
            data["student_laplace"].append({"r": r, "u": [float(u.real), float(u.imag)],
                                            "value": [float(v.real), float(v.imag)]})
    for r in (0.5, 0.75):
        for G in (2, 5, 10, 20, 50):
            data["pole_rates"].append({"r": r, "Gamma": G, "gamma": float(pole_rate(r, G))})
    for dc, t in ((100.0, 0.5), (100.0, 0.05), (10.0, 1.0)):
        data["truncated_char"].append({"r": 0.5, "delta_c": dc, "t": t,
                                       "value": float(truncated_char(0.5, dc, t))})
    OUT.write_text(json.dumps(data, indent=1) + "\n")


if __name__ == "__main__":
    main()
