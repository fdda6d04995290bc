"""Rebuild the generated fixtures in this directory.

Run from the repository root: ``python tests/data/regenerate.py``. The BIF
networks under ``networks/`` are hand written and never regenerated.
"""

from pathlib import Path

from bnkit.io import read_bif, save_csv, serialize_bif, serialize_uai
from bnkit.simulate import SimulationSpec, simulate

HERE = Path(__file__).parent
NETS = HERE / "networks"
GOLDEN = HERE / "golden"


def sample(name, n, seed, drop=()):
    bn = read_bif(NETS / f"{name}.bif")
    data = simulate(bn, SimulationSpec(n=n, seed=seed)).with_weights(None)
    return data.select([c for c in data.columns if c not in drop])


def main():
    # integer-count chain data: (A, B) counts 0,0:7  0,1:3  1,0:2  1,1:8
    rows = [("0", "0")] * 7 + [("0", "1")] * 3 + [("1", "0")] * 2 + [("1", "1")] * 8
    (HERE / "chain_counts.csv").write_text("A,B\n" + "".join(f"{a},{b}\n" for a, b in rows))
    (HERE / "chain_missing.csv").write_text("A,B\n0,0\n1,?\n0,1\n?,1\n1,1\n0,0\n")
    (HERE / "single.csv").write_text("X\n" + "0\n" * 7 + "1\n" * 3)
    save_csv(sample("chain", 2000, 1), HERE / "chain.csv")
    save_csv(sample("sprinkler", 2000, 5), HERE / "sprinkler.csv")
    save_csv(sample("latent", 2000, 3, drop=("H",)), HERE / "latent.csv")
    save_csv(sample("survey", 1000, 11), HERE / "survey.csv")
    for name in ("sprinkler", "asia", "quoted"):
        bn = read_bif(NETS / f"{name}.bif")
        (GOLDEN / f"{name}.canonical.bif").write_text(serialize_bif(bn))
        (GOLDEN / f"{name}.uai").write_text(serialize_uai(bn))


if __name__ == "__main__":
    main()
