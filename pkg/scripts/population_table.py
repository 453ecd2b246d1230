"""Population FSIR against the closed form over a grid of (alpha, delta, N)."""

import itertools
import math

from fsir.basis import BasisSpec
from fsir.estimate import fsir_solve, gamma_cosine
from fsir.simulate import ExampleSpec, oracle_beta, oracle_kernels


def main():
    print(f"{'alpha':>6} {'delta':>6} {'N':>5} {'lambda':>10} {'r/(1+r)':>10} {'abs err':>9} {'1 - cos':>9}")
    for alpha, delta, n in itertools.product((0.5, 1.0, 2.0), (0.1, 0.25, 0.5), (50, 200)):
        spec = ExampleSpec("binary", alpha, delta, n)
        basis = BasisSpec("cosine", n, max(512, 2 * n))
        _, Ge, G = oracle_kernels(spec, basis)
        res = fsir_solve(G, Ge, 1)
        r = alpha**2 * math.fsum(i ** -(2 + 2 * delta) for i in range(1, n + 1))
        lam = res.eigvals[0]
        cos = gamma_cosine(res.betas[0], oracle_beta(spec, basis), G)
        print(f"{alpha:6.2f} {delta:6.2f} {n:5d} {lam:10.6f} {r / (1 + r):10.6f} {abs(lam - r / (1 + r)):9.1e} {1 - cos:9.1e}")


if __name__ == "__main__":
    main()
