"""Independent reference computations whose outputs are frozen into the C++ tests.

Run: python3 tests/oracles/reference_values.py
"""
import math

import numpy as np


def beta_radius_example():
    # c=1, d=1, N=1, L=1, lambda=1, R=1, H=1, K=1, delta=1/e, k=1
    return math.sqrt(math.log(2) + math.log(3) + 1) + 2


def trapezoid(m):
    w = np.full(m, 2.0 / (m - 1))
    w[0] = w[-1] = 1.0 / (m - 1)
    return w


def uniform_shift_vstar(beta=0.5, H=2, mS=129, mA=65, s1=0.0):
    s = np.linspace(-1, 1, mS)
    a = np.linspace(-1, 1, mA)
    cell = trapezoid(mS)

    def reward(si, aj):
        return (1 + np.sin(np.pi * (si + aj) / 2)) / 2 / H

    def weights(si):
        lo, hi = beta * si, beta * si + 1 - beta
        dens = ((s >= lo) & (s <= hi)).astype(float) / (1 - beta)
        w = dens * cell
        return w / w.sum()

    V = np.zeros(mS)
    for h in range(H - 1, 0, -1):
        Vn = np.empty(mS)
        for i, si in enumerate(s):
            ev = weights(si) @ V
            Vn[i] = np.clip(reward(si, a) + ev, 0, 1).max()
        V = Vn
    ev = weights(s1) @ V
    q = np.clip(reward(s1, a) + ev, 0, 1)
    return q.max(), ev


def exact_linear_vstar(H=2):
    # reward (0.5 + 0.1 s + 0.3 a) / H, next state uniform: every step picks a = 1
    # and the expected reward of step h >= 2 is (0.5 + 0.3) / H at the mean state 0.
    return H * 0.8 / H


def taylor_sin_errors(eps_list=(0.5, 0.25, 0.125), grid=4001):
    x = np.linspace(-1, 1, grid)
    out = []
    for eps in eps_list:
        m = math.ceil(1 / eps - 1e-9)
        idx = np.clip(np.ceil((x + 1) * m / 2) - 1, 0, m - 1)
        c = -1 + (2 * idx + 1) / m
        u = x - c
        fit = np.sin(2 * c) + 2 * np.cos(2 * c) * u - 2 * np.sin(2 * c) * u ** 2
        out.append(np.abs(np.sin(2 * x) - fit).max())
    return out


if __name__ == "__main__":
    print(f"beta_radius_example {beta_radius_example():.15f}")
    v, ev = uniform_shift_vstar()
    print(f"uniform_shift_vstar_s1_0 {v:.15f} (expected next value {ev:.15f})")
    print(f"exact_linear_vstar {exact_linear_vstar():.15f}")
    for eps, e in zip((0.5, 0.25, 0.125), taylor_sin_errors()):
        print(f"taylor_sin eps={eps} err={e:.15f}")
