"""Full fold workflow on the cubic-quintic Allen-Cahn problem.

Finds the first bifurcation of the trivial branch, switches onto the
subcritical branch, locates its fold, continues the fold in a second
parameter, and exits back to ordinary continuation.  Writes point files,
branch CSVs and SVG plots under out/acfold.

Run:  python3 scripts/acfold_workflow.py
"""

import os

from pdecont import continuation, demos, io, plot, spcont, switching

OUT = os.path.join("out", "acfold")


def main():
    os.makedirs(OUT, exist_ok=True)

    # trivial branch: locate the first bifurcation point
    st = demos.make("acfold", {"nx": 20, "ny": 18})
    st.usrlam = []
    st.file.dir = OUT
    switching.findbif(st, 1)
    io.export_branch(st, os.path.join(OUT, "trivial.csv"))
    bif = [r for r in st.branch if r.ptype == 1][-1]
    print(f"trivial branch: bpt1 at lambda={bif.pars[0]:.4f}")

    # switch onto the bifurcating branch, continue through its fold
    st = io.load_point(OUT, "bpt1")
    st.file.dir = OUT
    switching.swibra(st, 0.1)
    st.switches.foldcheck = 1
    continuation.cont(st, 20)
    io.export_branch(st, os.path.join(OUT, "branch1.csv"))
    folds = [r for r in st.branch if r.ptype == 2]
    print(f"switched branch: fold at lambda={folds[0].pars[0]:.4f}")

    # fold continuation: track the fold in (lambda, gamma)
    st = io.load_point(OUT, "fpt1")
    st.file.dir = os.path.join(OUT, "foldcurve")
    spcont.spcontini(st, 3)                   # free gamma
    st.sol.ds = 0.05
    st.switches.bifcheck = 0
    continuation.cont(st, 10)
    io.export_branch(st, os.path.join(OUT, "foldcurve.csv"))
    lam, gam = st.getaux("lambda"), st.getaux("gamma")
    print(f"fold curve reached (lambda, gamma) = ({lam:.4f}, {gam:.4f})")

    # return to ordinary continuation from the last fold-curve point
    spcont.spcontexit(st)
    res = continuation.nloop(st, st.u)
    st.u = res["U"]
    print(f"exit reconverged with residual {res['res']:.2e}")

    tables = [io.read_branch_csv(os.path.join(OUT, n))
              for n in ("trivial.csv", "branch1.csv")]
    plot.plot_branch(tables, "lambda", "l2norm",
                     os.path.join(OUT, "branches.svg"))
    sol = io.load_point(OUT, "fpt1")
    plot.plot_solution(sol, 0, os.path.join(OUT, "fold_solution.svg"))
    print(f"wrote plots under {OUT}")


if __name__ == "__main__":
    main()
