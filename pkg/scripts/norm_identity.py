"""Compare the two substitutions in the whitened-operator norm identity for the binary model."""

import json

from fsir.basis import BasisSpec
from fsir.diagnostics import theorem1_check
from fsir.simulate import ExampleSpec, oracle_kernels

if __name__ == "__main__":
    spec = ExampleSpec("binary", 1.0, 0.5, 200)
    _, Ge, G = oracle_kernels(spec, BasisSpec("cosine", 200, 512))
    out = theorem1_check(G, Ge, trials=1000, seed=0)
    print(json.dumps(out, indent=2, sort_keys=True))
