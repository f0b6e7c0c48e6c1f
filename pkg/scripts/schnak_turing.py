"""Turing patterns in the Schnakenberg system.

Continues the homogeneous branch down in lambda until the Turing
bifurcation, switches onto the stripe branch, and follows it.  Writes
branch CSVs, point files and plots under out/schnak.

Run:  python3 scripts/schnak_turing.py
"""

import os

import numpy as np

from pdecont import continuation, demos, io, plot, switching

OUT = os.path.join("out", "schnak")


def main():
    os.makedirs(OUT, exist_ok=True)

    st = demos.make("schnak")
    st.file.dir = OUT
    switching.findbif(st, 1)
    io.export_branch(st, os.path.join(OUT, "homog.csv"))
    bif = [r for r in st.branch if r.ptype == 1][-1]
    print(f"Turing point at lambda={bif.pars[0]:.4f} "
          f"(critical wavenumber kc={demos.KC_SCHNAK:.4f})")

    st = io.load_point(OUT, "bpt1")
    st.file.dir = OUT
    switching.swibra(st, -0.05)
    continuation.cont(st, 10)
    io.export_branch(st, os.path.join(OUT, "stripes.csv"))
    amp = max(abs(r.user[0] - r.pars[0]) for r in st.branch if r.user)
    print(f"stripe branch followed to lambda={st.primary_value:.4f}, "
          f"pattern amplitude {amp:.3f}")

    tables = [io.read_branch_csv(os.path.join(OUT, n))
              for n in ("homog.csv", "stripes.csv")]
    plot.plot_branch(tables, "lambda", "max_u",
                     os.path.join(OUT, "bifurcation.svg"))
    plot.plot_solution(st, 0, os.path.join(OUT, "stripes.svg"))
    print(f"wrote plots under {OUT}")


if __name__ == "__main__":
    main()
