"""Point-file persistence and branch CSV export.

Point files are self-describing JSON: a header (format version, demo name
and config, mesh/problem bookkeeping) plus the payload arrays u and tau at
full double precision.  Operator caches and fill/drop matrices are never
serialized; the loader rebuilds them through the demo registry, so a loaded
point evaluates identically to the saved one.
"""

from __future__ import annotations

import json
import os

import numpy as np

from . import problem

FORMAT_VERSION = 1


class IOError_(RuntimeError):
    pass


def _json_config(cfg):
    out = {}
    for k, v in cfg.items():
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        out[k] = v
    return out


def save_point(state, name):
    """Write <dir>/<name>.json atomically (write-temp-rename)."""
    if not state.file.dir:
        raise IOError_("no output directory set")
    os.makedirs(state.file.dir, exist_ok=True)
    doc = {
        "format": FORMAT_VERSION,
        "demo": state.name,
        "config": _json_config(state.demo_config),
        "neq": state.neq,
        "bcper": int(state.switches.bcper),
        "ilam": list(map(int, state.ilam)),
        "nq": int(state.nq),
        "ptype": int(state.ptype),
        "mode": state.mode,
        "spdata": ({"nu_base": int(state.spdata["nu_base"]),
                    "old_primary": int(state.spdata.get("old_primary", 1))}
                   if state.spdata else None),
        "spcont": int(state.switches.spcont),
        "sfem": int(state.switches.sfem),
        "counters": {"count": state.file.count, "bcount": state.file.bcount,
                     "fcount": state.file.fcount},
        "parnames": list(state.parnames),
        "usrlam": [float(v) for v in state.usrlam],
        "ds": float(state.sol.ds),
        "ineg": int(state.sol.ineg),
        "time": float(state.demo_config.get("time", 0.0)),
        "err_column": "unset (no error estimator)",
        "u": state.u.tolist(),
        "tau": None if state.tau is None else state.tau.tolist(),
        "uold": None if state.uold is None else state.uold.tolist(),
        "branch": [rec.__dict__ for rec in state.branch],
    }
    path = os.path.join(state.file.dir, f"{name}.json")
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh)
    os.replace(tmp, path)
    return path


def load_point(directory, name):
    """Rebuild a ProblemState from a point file via the demo registry."""
    from . import demos
    from .continuation import BranchRecord

    path = os.path.join(directory, name if name.endswith(".json")
                        else f"{name}.json")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise IOError_(f"cannot read point file {path}: {exc}") from exc
    if doc.get("format") != FORMAT_VERSION:
        raise IOError_(f"unsupported point-file format {doc.get('format')!r}")

    state = demos.make(doc["demo"], doc["config"])
    if state.neq != doc["neq"]:
        raise IOError_("point file is inconsistent with the demo definition")
    if int(doc["bcper"]) != state.switches.bcper:
        state.switches.bcper = int(doc["bcper"])
        problem.setfemops(state)

    state.switches.sfem = int(doc["sfem"])
    state.switches.spcont = int(doc["spcont"])
    state.mode = doc["mode"]
    state.spdata = doc["spdata"]
    state.nq = int(doc["nq"])
    state.ilam = [int(i) for i in doc["ilam"]]
    state.ptype = int(doc["ptype"])
    state.file.count = int(doc["counters"]["count"])
    state.file.bcount = int(doc["counters"]["bcount"])
    state.file.fcount = int(doc["counters"]["fcount"])
    state.usrlam = [float(v) for v in doc["usrlam"]]
    state.sol.ds = float(doc["ds"])
    state.sol.ineg = int(doc["ineg"])
    u = np.asarray(doc["u"], dtype=float)
    if len(u) != state.nu + len(doc["parnames"]):
        raise IOError_("unknown-vector length does not match the problem")
    state.u = u
    state.tau = None if doc["tau"] is None else np.asarray(doc["tau"],
                                                           dtype=float)
    state.uold = None if doc["uold"] is None else np.asarray(doc["uold"],
                                                             dtype=float)
    state.branch = [BranchRecord(**rec) for rec in doc["branch"]]
    state.file.dir = directory
    return state


# ---------------------------------------------------------------------------
# branch CSV

def branch_header(state):
    parcols = [state.parnames[i - 1] for i in state.ilam]
    return (["count", "ptype"] + list(parcols)
            + ["ineg", "err", "l2norm", "usr"] + list(state.callbacks.outnames))


def export_branch(state, path=None):
    """CSV with one row per branch record; returns the CSV text."""
    if not state.branch:
        raise IOError_("branch is empty")
    lines = [",".join(branch_header(state))]
    for rec in state.branch:
        cells = ([str(rec.count), str(rec.ptype)]
                 + [repr(v) for v in rec.pars]
                 + [str(rec.ineg), repr(rec.err), repr(rec.l2norm),
                    str(rec.usr)]
                 + [repr(v) for v in rec.user])
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if path:
        tmp = str(path) + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    return text


def read_branch_csv(path):
    """Parse an exported CSV back into (header, rows of floats)."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    header = lines[0].split(",")
    rows = [[float(c) for c in ln.split(",")] for ln in lines[1:]]
    return header, rows
