"""Run orchestration, CSV export and the plain-text summary table.

A run directory holds ``spec.txt`` (the resolved spec, readable by
:func:`semibohm.scenarios.parse_config`), ``audits.csv`` and the CSV files
listed below. Numbers are written with ``repr``, the shortest decimal string
that reads back to the same double, so identical specs give identical files.

==================== =========================================================
file                 columns
==================== =========================================================
trajectories.csv     t, seed_index, y, X, P
classical.csv        t, seed_index, y, X, P, jac
density.csv          t, x, rho
conservation.csv     t, mass, energy, kinetic_transport, kinetic_quantum
caustic.txt          T*, x*, y* (one ``key=value`` per line)
branches.csv         t, x, j, Y_j, S_j, |a_j|, m_minus   (free scenarios)
measures.csv         t, x, measure, p_lo, p_hi, p, mass  (free scenarios)
audits.csv           audit, passed, value, threshold
==================== =========================================================
"""
import csv
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .bohmian import co_evolve, deviation_measure, max_trajectory_difference, non_crossing_audit
from .classical import caustic_onset, classical_bundle
from .errors import CausticError
from .measures import branch_set, limiting_bohmian_measure, limiting_wigner_measure
from .scenarios import build_scenario, parse_config
from .solver import energy, init_state, kinetic_split, mass
from .spectral import boundary_decay
from .trajectories import TrajectoryBundle

ENERGY_DRIFT_TOL = 1e-7
MASS_DRIFT_TOL = 1e-10
DOUBLING_TOL = 1e-4
SYMMETRY_TOL = 1e-6
BOUNDARY_TOL = 1e-10
DEVIATION_DELTA = 0.05
NODE_TOL = 1e-4

TRAJ_HEADER = ("t", "seed_index", "y", "X", "P")
BRANCH_HEADER = ("t", "x", "j", "Y_j", "S_j", "|a_j|", "m_minus")
MEASURE_HEADER = ("t", "x", "measure", "p_lo", "p_hi", "p", "mass")
AUDIT_HEADER = ("audit", "passed", "value", "threshold")


# -- CSV helpers ---------------------------------------------------------------


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, columns):
    """Write equally long columns under ``header``."""
    columns = [np.asarray(c) if not isinstance(c, list) else c for c in columns]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([_fmt(v) for v in row])


def read_csv(path):
    """Columns of a CSV file as a dict of arrays (floats where possible)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    out = {}
    for i, name in enumerate(header):
        col = [r[i] for r in body]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = np.array(col)
    return out


def _bundle_columns(bundle):
    m, nt = bundle.x.shape
    t = np.tile(bundle.times, m)
    idx = np.repeat(np.arange(m), nt)
    y = np.repeat(bundle.seeds, nt)
    cols = [t, idx, y, bundle.x.ravel(), bundle.p.ravel()]
    if bundle.jac is not None:
        cols.append(bundle.jac.ravel())
    return cols


def read_bundle(path, epsilon=None):
    """Rebuild a :class:`TrajectoryBundle` from ``trajectories.csv`` or ``classical.csv``."""
    d = read_csv(path)
    idx = d["seed_index"].astype(int)
    m = idx.max() + 1
    nt = idx.size // m
    order = np.lexsort((d["t"], idx))
    shape = (m, nt)
    seeds = d["y"][order].reshape(shape)[:, 0]
    times = d["t"][order].reshape(shape)[0]
    jac = d["jac"][order].reshape(shape) if "jac" in d else None
    return TrajectoryBundle(seeds, times, d["X"][order].reshape(shape),
                            d["P"][order].reshape(shape), epsilon=epsilon, jac=jac)


def write_keyvalue(path, items):
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in items:
            fh.write(f"{k}={_fmt(v)}\n")


def read_keyvalue(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if "=" in line:
                k, v = line.strip().split("=", 1)
                out[k] = float(v)
    return out


# -- run -----------------------------------------------------------------------


@dataclass
class Audit:
    name: str
    passed: bool
    value: float
    threshold: float

    def line(self):
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.name}: {self.value:.3e} (threshold {self.threshold:.1e})"


@dataclass
class RunReport:
    """Outcome of one run: spec, files written, audits and headline numbers."""

    spec: object
    out_dir: str
    files: list = field(default_factory=list)
    audits: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    #: In-memory results of a fresh run (``bohmian``, ``classical``, ``fields``);
    #: empty for reports rebuilt from disk.
    data: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self):
        return all(a.passed for a in self.audits)


def deviation_windows(t_star, t_final):
    """Pre- and post-caustic time windows used for the deviation measure.

    Pre: ``[0, 0.75 T*]`` (the whole run without a caustic). Post:
    ``[T* + 0.1, min(T* + 0.3, t_final)]`` or ``None`` if that is empty.
    """
    if not np.isfinite(t_star):
        return (0.0, t_final), None
    pre = (0.0, min(0.75 * t_star, t_final))
    lo = t_star + 0.1
    post = (lo, min(t_star + 0.3, t_final)) if lo < t_final else None
    return pre, post


def _deviations(bohm, classical, t_star, t_final):
    pre, post = deviation_windows(t_star, t_final)
    d_pre = deviation_measure(bohm, classical, DEVIATION_DELTA, pre)
    d_post = np.nan
    if post is not None:
        d_post = deviation_measure(bohm, classical, DEVIATION_DELTA, post)
    return d_pre, d_post


def _drift(values):
    values = np.asarray(values)
    return float(np.max(np.abs(values - values[0])) / abs(values[0]))


def node_rows(bundle, tol=NODE_TOL):
    """Rows whose trajectory ran into a node of psi.

    A row counts when the relative density along its path fell to ``tol``
    times its starting value or below. Seeds out in the amplitude tail start
    small but do not drop like this, so they are kept.
    """
    if bundle.min_density is None:
        return np.zeros(bundle.x.shape[0], dtype=bool)
    return bundle.min_density <= tol


def _rows(bundle, keep):
    return TrajectoryBundle(bundle.seeds[keep], bundle.times, bundle.x[keep],
                            bundle.p[keep], bundle.epsilon)


def _branch_rows(sc, classical, n_times=11, n_x=41):
    times = classical.times
    picks = np.unique(np.round(np.linspace(0, times.size - 1, n_times)).astype(int))
    rows = []
    for j in picks:
        t = float(times[j])
        xs = np.linspace(classical.x[:, j].min(), classical.x[:, j].max(), n_x)
        for x in xs:
            try:
                bs = branch_set(t, float(x), sc.amplitude, sc.phase)
            except CausticError:
                continue
            for k, br in enumerate(bs.branches):
                rows.append((t, float(x), k, br.y, br.s, abs(br.amp), br.m_minus))
    return rows


def _measure_rows(sc, caustic, samples):
    t = sc.t_final
    if caustic.found and caustic.t_star < t:
        x = caustic.x_star
    elif sc.symmetry_point is not None:
        x = sc.symmetry_point
    else:
        x = float(np.mean(sc.seed_window()))
    bs = branch_set(t, x, sc.amplitude, sc.phase)
    rows = []
    hist = limiting_bohmian_measure(bs, samples=samples, bins=256)
    for lo, hi, p, m in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.centroids, hist.masses):
        if m > 0:
            rows.append((t, x, "bohmian", lo, hi, p, m))
    for p, m in limiting_wigner_measure(bs):
        rows.append((t, x, "wigner", p, p, p, m))
    return rows


def run_scenario(spec, out_dir=None, echo=print):
    """Run one scenario, write its files and print the audit verdicts.

    Parameters
    ----------
    spec : ScenarioSpec
    out_dir : str, optional
        Created if missing. Without it nothing is written.
    echo : callable
        Receives one line per audit.

    Returns
    -------
    RunReport
    """
    started = time.perf_counter()
    sc = build_scenario(spec)
    eps, V = sc.epsilon, sc.potential
    f0 = init_state(sc.grid, sc.data, eps)
    seeds = sc.seed_set()
    bohm, fields = co_evolve(f0, V, eps, sc.dt, sc.steps, seeds.seeds, sc.snapshot_stride)
    classical = classical_bundle(seeds.seeds, bohm.times, sc.phase, V)
    caustic = caustic_onset(sc.phase, V, sc.seed_window(), (0.0, sc.t_final))

    masses = np.array([mass(f) for f in fields])
    energies = np.array([energy(f, V, eps) for f in fields])
    splits = np.array([kinetic_split(f, eps) for f in fields])

    audits = []
    ok, where = non_crossing_audit(bohm)
    audits.append(Audit("non_crossing", ok, 0.0 if ok else float(where[1]), 0.0))
    audits.append(Audit("mass_drift", _drift(masses) <= MASS_DRIFT_TOL, _drift(masses), MASS_DRIFT_TOL))
    e_drift = _drift(energies)
    audits.append(Audit("energy_drift", e_drift <= ENERGY_DRIFT_TOL, e_drift, ENERGY_DRIFT_TOL))
    rim = max(
        float(np.max(np.abs(np.r_[f.values[: f.grid.n // 16], f.values[-(f.grid.n // 16):]]))
              / np.max(np.abs(f.values)))
        for f in fields
    )
    audits.append(Audit("boundary_decay", all(boundary_decay(f, BOUNDARY_TOL) for f in fields),
                        rim, BOUNDARY_TOL))
    # Trajectories that run through a node of psi are ill-conditioned: rounding
    # near the node is amplified without bound, so the trajectory-by-trajectory
    # audits below leave them out and say so.
    at_node = node_rows(bohm)
    notes = []
    if at_node.any():
        notes.append(f"NOTE {int(at_node.sum())} trajectory(ies) meet a node of psi "
                     "and are left out of step_doubling and symmetry")
    if spec.doubling:
        fine, _ = co_evolve(f0, V, eps, 0.5 * sc.dt, 2 * sc.steps, seeds.seeds,
                            2 * sc.snapshot_stride, keep_fields=False)
        keep = ~at_node
        diff = 0.0
        if keep.any():
            diff = max_trajectory_difference(_rows(bohm, keep), _rows(fine, keep))
        audits.append(Audit("step_doubling", diff <= DOUBLING_TOL, diff, DOUBLING_TOL))
    if sc.symmetry_point is not None:
        hit = np.nonzero(np.abs(seeds.seeds - sc.symmetry_point) < 1e-9)[0]
        if hit.size and not at_node[hit[0]]:
            i = int(hit[0])
            dev = float(np.max(np.abs(bohm.x[i] - seeds.seeds[i])))
            audits.append(Audit("symmetry", dev <= SYMMETRY_TOL, dev, SYMMETRY_TOL))
    for line in notes:
        echo(line)
    for a in audits:
        echo(a.line())

    d_pre, d_post = _deviations(bohm, classical, caustic.t_star, sc.t_final)
    report = RunReport(spec, out_dir, audits=audits)
    report.summary = dict(
        mass_drift=_drift(masses),
        energy_drift=e_drift,
        t_star=caustic.t_star,
        deviation_pre=d_pre,
        deviation_post=d_post,
        runtime=time.perf_counter() - started,
    )
    report.data = dict(bohmian=bohm, classical=classical, fields=fields, caustic=caustic)
    if out_dir is None:
        return report

    os.makedirs(out_dir, exist_ok=True)
    path = lambda name: os.path.join(out_dir, name)

    def emit(name, writer, *args):
        writer(path(name), *args)
        report.files.append(name)

    with open(path("spec.txt"), "w", encoding="utf-8") as fh:
        fh.write(spec.to_text())
    report.files.append("spec.txt")
    emit("audits.csv", write_csv, AUDIT_HEADER,
         [[a.name for a in audits], [a.passed for a in audits],
          [a.value for a in audits], [a.threshold for a in audits]])
    wanted = set(spec.outputs)
    if "trajectories" in wanted:
        emit("trajectories.csv", write_csv, TRAJ_HEADER, _bundle_columns(bohm))
    if "classical" in wanted:
        emit("classical.csv", write_csv, TRAJ_HEADER + ("jac",), _bundle_columns(classical))
    if "density" in wanted:
        keep = np.arange(0, sc.grid.n, spec.density_stride)
        xs = sc.grid.nodes[keep]
        emit("density.csv", write_csv, ("t", "x", "rho"),
             [np.repeat(bohm.times, keep.size), np.tile(xs, len(fields)),
              np.concatenate([f.density[keep] for f in fields])])
    if "conservation" in wanted:
        emit("conservation.csv", write_csv,
             ("t", "mass", "energy", "kinetic_transport", "kinetic_quantum"),
             [bohm.times, masses, energies, splits[:, 0], splits[:, 1]])
    if "caustic" in wanted:
        emit("caustic.txt", write_keyvalue,
             [("T*", caustic.t_star), ("x*", caustic.x_star), ("y*", caustic.y_star)])
    if sc.is_free and "branches" in wanted:
        rows = _branch_rows(sc, classical)
        emit("branches.csv", write_csv, BRANCH_HEADER, [list(c) for c in zip(*rows)])
    if sc.is_free and "measures" in wanted:
        rows = _measure_rows(sc, caustic, spec.measure_samples)
        emit("measures.csv", write_csv, MEASURE_HEADER, [list(c) for c in zip(*rows)])
    return report


# -- reports ---------------------------------------------------------------------


def load_run(run_dir):
    """Rebuild a :class:`RunReport` from the files of a finished run."""
    spec = parse_config(os.path.join(run_dir, "spec.txt"))
    report = RunReport(spec, run_dir, files=sorted(os.listdir(run_dir)))
    a = read_csv(os.path.join(run_dir, "audits.csv"))
    report.audits = [
        Audit(str(n), bool(p), float(v), float(t))
        for n, p, v, t in zip(a["audit"], a["passed"], a["value"], a["threshold"])
    ]
    summary = {}
    cons = os.path.join(run_dir, "conservation.csv")
    if os.path.exists(cons):
        c = read_csv(cons)
        summary.update(mass_drift=_drift(c["mass"]), energy_drift=_drift(c["energy"]))
    caus = os.path.join(run_dir, "caustic.txt")
    t_star = read_keyvalue(caus)["T*"] if os.path.exists(caus) else np.inf
    summary["t_star"] = t_star
    traj, clas = (os.path.join(run_dir, n) for n in ("trajectories.csv", "classical.csv"))
    if os.path.exists(traj) and os.path.exists(clas):
        bohm = read_bundle(traj, spec.epsilon)
        classical = read_bundle(clas)
        summary["deviation_pre"], summary["deviation_post"] = _deviations(
            bohm, classical, t_star, spec.t_final
        )
    report.summary = summary
    return report


def find_runs(root):
    """Run directories at ``root`` or one level below it, sorted by path."""
    if os.path.exists(os.path.join(root, "spec.txt")):
        return [root]
    if not os.path.isdir(root):
        raise FileNotFoundError(f"no such directory: {root}")
    subs = sorted(
        os.path.join(root, d) for d in os.listdir(root)
        if os.path.exists(os.path.join(root, d, "spec.txt"))
    )
    return subs


def summary_report(runs):
    """Plain-text table of conservation extremes, audit verdicts and deviations.

    When the runs share a scenario but differ in ``epsilon`` a closing line
    states whether the pre-caustic deviation decreases with ``epsilon``.
    """
    if not runs:
        raise ValueError("no runs to report")
    head = ("scenario", "epsilon", "mass_drift", "energy_drift", "T*",
            "dev_pre", "dev_post", "audits")
    rows = []
    for r in runs:
        s = r.summary
        fails = [a.name for a in r.audits if not a.passed]
        verdict = "PASS" if not fails else "FAIL(" + ",".join(fails) + ")"
        rows.append((
            r.spec.name,
            f"{r.spec.epsilon:g}",
            f"{s.get('mass_drift', np.nan):.2e}",
            f"{s.get('energy_drift', np.nan):.2e}",
            f"{s.get('t_star', np.nan):.6g}",
            f"{s.get('deviation_pre', np.nan):.4f}",
            f"{s.get('deviation_post', np.nan):.4f}",
            verdict,
        ))
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(head)]
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [line(head), line(["-" * w for w in widths])] + [line(r) for r in rows]
    names = {r.spec.name for r in runs}
    eps = [r.spec.epsilon for r in runs]
    if len(names) == 1 and len(set(eps)) > 1:
        order = sorted(runs, key=lambda r: -r.spec.epsilon)
        devs = [r.summary.get("deviation_pre", np.nan) for r in order]
        mono = all(b < a for a, b in zip(devs, devs[1:]))
        out.append("")
        out.append("pre-caustic deviation strictly decreasing as epsilon decreases: "
                   + ("yes" if mono else "no"))
    return "\n".join(out) + "\n"
