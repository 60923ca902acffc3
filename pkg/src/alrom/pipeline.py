"""Pipeline stages: fom -> reduce -> rom -> compare, plus the sweep driver.

Every stage reads and writes files under an output directory, so each CLI
subcommand maps to one function here.  All text output uses 17 significant
digits and fixed column orders; repeated runs are byte-identical.

Directory layout under the output root:

    fom/                     snapshots_{p,q,m}.alrm, snapshot_times.alrm,
                             invariants.csv, profile_{initial,final}.csv,
                             spacetime_modulus.csv
    reduce_<nr>_<nd>/        basis_{p,q}.alrm, deim_{phi,psi}.alrm,
                             kron_{p,q}.alrm, deim_points.csv,
                             spectrum_{p,q,m}.csv, model.json
    rom_<nr>_<nd>_<variant>/ lifted_{p,q}.alrm, invariants.csv,
                             profile_{initial,final}.csv,
                             balance_{h,i}.csv (damped only)
    compare_<nr>_<nd>/       metrics.csv, error_series.csv
    table.csv                one metrics row per sweep entry
"""

import json
from pathlib import Path

import numpy as np

from . import lattice, metrics, reduction, rom
from .config import RunConfig
from .integrators import exponential_stepper, integrate, midpoint_stepper
from .matrixio import read_matrix, write_matrix

METRICS_COLUMNS = (
    "n_r",
    "n_d",
    "rel_err",
    "cons_err_h",
    "cons_err_i",
    "bal_h_meanabs_oracle",
    "bal_i_meanabs_oracle",
    "bal_h_meanabs_literal",
    "bal_i_meanabs_literal",
    "bal_h_template_literal",
    "bal_i_template_literal",
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = len(columns[0])
    lines = [",".join(header)]
    for k in range(rows):
        lines.append(",".join(_fmt(float(col[k])) for col in columns))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> dict[str, np.ndarray]:
    lines = Path(path).read_text().strip().splitlines()
    names = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return {name: data[:, j] for j, name in enumerate(names)}


def _spacetime_columns(n_samples: int, max_cols: int = 201) -> np.ndarray:
    step = max(1, -(-n_samples // max_cols))
    return np.arange(0, n_samples, step)


def run_fom(cfg: RunConfig, out_root) -> Path:
    """Integrate the full-order lattice and persist snapshots and series."""
    out = Path(out_root) / "fom"
    out.mkdir(parents=True, exist_ok=True)
    lat = cfg.lattice()
    state0 = cfg.initial_state()
    z0 = lattice.pack(state0)

    system = lattice.FullOrderSystem(lat, include_damping=False)
    stepper = midpoint_stepper if lat.mu == 0.0 else exponential_stepper(lat.mu)
    traj = integrate(system, z0, stepper, lat.dt, lat.t_final, cfg.solver)

    n = lat.n_sites
    h_series = np.array([system.hamiltonian(z) for z in traj.states])
    i_series = np.array([system.momentum(z) for z in traj.states])
    write_csv(out / "invariants.csv", ["time", "hamiltonian", "momentum"],
              [traj.times, h_series, i_series])

    snap_times, snap_states = traj.strided(cfg.snapshot_stride)
    p_snap = snap_states[:, :n].T
    q_snap = snap_states[:, n:].T
    m_snap = 1.0 + lat.gamma * lat.mesh**2 * (p_snap**2 + q_snap**2)
    write_matrix(out / "snapshots_p.alrm", p_snap)
    write_matrix(out / "snapshots_q.alrm", q_snap)
    write_matrix(out / "snapshots_m.alrm", m_snap)
    write_matrix(out / "snapshot_times.alrm", snap_times)

    x = lat.grid()
    modulus = np.hypot(p_snap, q_snap)
    write_csv(out / "profile_initial.csv", ["x", "modulus"], [x, modulus[:, 0]])
    write_csv(out / "profile_final.csv", ["x", "modulus"], [x, modulus[:, -1]])
    cols = _spacetime_columns(modulus.shape[1])
    write_csv(out / "spacetime_modulus.csv",
              ["x"] + [_fmt(float(t)) for t in snap_times[cols]],
              [x] + [modulus[:, j] for j in cols])
    print(f"fom: {traj.n_steps} steps, {p_snap.shape[1]} snapshots -> {out}")
    return out


def _pod_from_files(fom_dir: Path, cfg: RunConfig):
    times = read_matrix(fom_dir / "snapshot_times.alrm").ravel()
    snaps = {}
    for label in ("p", "q", "m"):
        snaps[label] = reduction.SnapshotSet(
            data=read_matrix(fom_dir / f"snapshots_{label}.alrm"),
            times=times,
            label=label,
        )
    pod = cfg.pod
    if pod.n_r is not None:
        pod_p = reduction.pod_basis(snaps["p"], n_modes=pod.n_r)
        pod_q = reduction.pod_basis(snaps["q"], n_modes=pod.n_r)
    else:
        # equal mode counts for both components: the larger criterion rank
        sv_p = reduction.pod_basis(snaps["p"], n_modes=1).singular_values
        sv_q = reduction.pod_basis(snaps["q"], n_modes=1).singular_values
        rank = max(reduction.truncation_rank(sv_p, pod.kappa_state),
                   reduction.truncation_rank(sv_q, pod.kappa_state))
        pod_p = reduction.pod_basis(snaps["p"], n_modes=rank)
        pod_q = reduction.pod_basis(snaps["q"], n_modes=rank)
    if pod.n_d is not None:
        pod_m = reduction.pod_basis(snaps["m"], n_modes=pod.n_d)
    else:
        pod_m = reduction.pod_basis(snaps["m"], tolerance=pod.kappa_nonlin)
    return pod_p, pod_q, pod_m


def run_reduce(cfg: RunConfig, out_root, n_r: int | None = None,
               n_d: int | None = None) -> Path:
    """Build POD bases, the Q-DEIM operator, and the Kronecker constants."""
    root = Path(out_root)
    fom_dir = root / "fom"
    if n_r is not None or n_d is not None:
        from dataclasses import replace
        cfg = replace(cfg, pod=replace(cfg.pod, n_r=n_r, n_d=n_d))
    pod_p, pod_q, pod_m = _pod_from_files(fom_dir, cfg)
    deim_points = reduction.qdeim_points(pod_m.modes)
    deim = reduction.deim_operator(pod_m.modes, deim_points)
    model = rom.build_reduced_model(pod_p, pod_q, deim, cfg.lattice())

    out = root / f"reduce_{pod_p.retained}_{pod_m.retained}"
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "basis_p.alrm", model.v_p)
    write_matrix(out / "basis_q.alrm", model.v_q)
    write_matrix(out / "deim_phi.alrm", deim.basis)
    write_matrix(out / "deim_psi.alrm", model.psi)
    write_matrix(out / "kron_p.alrm", model.kron_p)
    write_matrix(out / "kron_q.alrm", model.kron_q)
    write_csv(out / "deim_points.csv", ["point"], [deim.points.astype(float)])
    for label, basis in (("p", pod_p), ("q", pod_q), ("m", pod_m)):
        s = basis.singular_values
        write_csv(out / f"spectrum_{label}.csv",
                  ["index", "singular_value", "normalized"],
                  [np.arange(1, s.size + 1, dtype=float), s, s / s[0]])
    meta = {
        "n_r_p": pod_p.retained,
        "n_r_q": pod_q.retained,
        "n_d": pod_m.retained,
        "captured_energy_p": pod_p.captured_energy,
        "captured_energy_q": pod_q.captured_energy,
        "captured_energy_m": pod_m.captured_energy,
        "deim_condition": deim.condition,
        "gamma": model.gamma,
        "mesh": model.mesh,
        "mu": model.mu,
    }
    (out / "model.json").write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n")
    print(
        f"reduce: N_r={pod_p.retained} N_d={pod_m.retained} "
        f"energy_p={pod_p.captured_energy:.12f} energy_q={pod_q.captured_energy:.12f} "
        f"cond(P^T Phi)={deim.condition:.6g} -> {out}"
    )
    return out


def load_reduced_model(reduce_dir, cfg: RunConfig) -> rom.ReducedModel:
    reduce_dir = Path(reduce_dir)
    meta = json.loads((reduce_dir / "model.json").read_text())
    v_p = read_matrix(reduce_dir / "basis_p.alrm")
    v_q = read_matrix(reduce_dir / "basis_q.alrm")
    psi = read_matrix(reduce_dir / "deim_psi.alrm")
    points = read_csv(reduce_dir / "deim_points.csv")["point"].astype(int)
    lat = cfg.lattice()
    d = lattice.neighbor_sum_matrix(lat.n_sites, lat.mesh)
    b = rom.central_difference_matrix(lat.n_sites, lat.mesh)
    return rom.ReducedModel(
        v_p=v_p,
        v_q=v_q,
        red_d_p=v_p.T @ (d @ v_p),
        red_d_q=v_q.T @ (d @ v_q),
        sampled_p=v_p[points, :],
        sampled_q=v_q[points, :],
        kron_p=read_matrix(reduce_dir / "kron_p.alrm"),
        kron_q=read_matrix(reduce_dir / "kron_q.alrm"),
        points=points,
        psi=psi,
        red_b=v_q.T @ (b @ v_p),
        gamma=meta["gamma"],
        mesh=meta["mesh"],
        mu=meta["mu"],
    )


def run_rom(cfg: RunConfig, out_root, reduce_dir, variant: str = "pod_deim") -> Path:
    """Integrate the reduced system and persist lifted diagnostics."""
    root = Path(out_root)
    model = load_reduced_model(reduce_dir, cfg)
    lat = cfg.lattice()
    state0 = cfg.initial_state()
    z_r0 = np.concatenate([model.v_p.T @ state0.p, model.v_q.T @ state0.q])

    system = rom.reduced_system(model, variant=variant, include_damping=False)
    stepper = midpoint_stepper if lat.mu == 0.0 else exponential_stepper(lat.mu)
    traj = integrate(system, z_r0, stepper, lat.dt, lat.t_final, cfg.solver)

    n_rp, n_rq = model.n_modes
    n_d = model.psi.shape[1]
    out = root / f"rom_{n_rp}_{n_d}_{variant}"
    out.mkdir(parents=True, exist_ok=True)

    h_series = np.array([model.reduced_hamiltonian(z) for z in traj.states])
    i_series = np.array([model.reduced_momentum(z) for z in traj.states])
    write_csv(out / "invariants.csv", ["time", "hamiltonian", "momentum"],
              [traj.times, h_series, i_series])

    snap_times, snap_states = traj.strided(cfg.snapshot_stride)
    write_matrix(out / "reduced_states.alrm", snap_states.T)  # (2 N_r, samples)
    lifted_p = model.v_p @ snap_states[:, :n_rp].T
    lifted_q = model.v_q @ snap_states[:, n_rp:].T
    write_matrix(out / "lifted_p.alrm", lifted_p)
    write_matrix(out / "lifted_q.alrm", lifted_q)

    x = lat.grid()
    modulus = np.hypot(lifted_p, lifted_q)
    write_csv(out / "profile_initial.csv", ["x", "modulus"], [x, modulus[:, 0]])
    write_csv(out / "profile_final.csv", ["x", "modulus"], [x, modulus[:, -1]])

    if lat.mu != 0.0:
        # H and I keep their sign under geometric decay; the log ratios are
        # taken on magnitudes so negative invariants (momentum) work too
        oracle = metrics.RateConstants.derived_oracle()
        bal_h = metrics.balance_residuals(traj.times, np.abs(h_series), lat.mu,
                                          lat.dt, oracle.c_h)
        bal_i = metrics.balance_residuals(traj.times, np.abs(i_series), lat.mu,
                                          lat.dt, oracle.c_i)
        write_csv(out / "balance_h.csv", ["time", "residual"], [bal_h.times, bal_h.values])
        write_csv(out / "balance_i.csv", ["time", "residual"], [bal_i.times, bal_i.values])
    meta = {"n_r": n_rp, "n_d": n_d, "variant": variant}
    (out / "rom_meta.json").write_text(json.dumps(meta, sort_keys=True) + "\n")
    print(f"rom[{variant}]: N_r={n_rp} N_d={n_d} {traj.n_steps} steps -> {out}")
    return out


def run_compare(cfg: RunConfig, out_root, fom_dir, rom_dir) -> Path:
    """FOM-vs-ROM metrics row plus the per-sample error series."""
    root = Path(out_root)
    fom_dir, rom_dir = Path(fom_dir), Path(rom_dir)
    lat = cfg.lattice()

    p_f = read_matrix(fom_dir / "snapshots_p.alrm")
    q_f = read_matrix(fom_dir / "snapshots_q.alrm")
    p_r = read_matrix(rom_dir / "lifted_p.alrm")
    q_r = read_matrix(rom_dir / "lifted_q.alrm")
    if p_f.shape != p_r.shape:
        raise ValueError(
            f"sampling grids differ: fom {p_f.shape} vs rom {p_r.shape}"
        )
    times = read_matrix(fom_dir / "snapshot_times.alrm").ravel()
    fom_states = np.vstack([p_f, q_f]).T  # (samples, 2N)
    rom_states = np.vstack([p_r, q_r]).T
    rel = metrics.relative_solution_error(fom_states, rom_states)
    err_t = (np.linalg.norm(fom_states - rom_states, axis=1)
             / np.linalg.norm(fom_states, axis=1))

    inv_f = read_csv(fom_dir / "invariants.csv")
    inv_r = read_csv(rom_dir / "invariants.csv")
    cons_h = metrics.conservation_error(inv_r["hamiltonian"],
                                        reference=inv_f["hamiltonian"][0])
    cons_i = metrics.conservation_error(inv_r["momentum"],
                                        reference=inv_f["momentum"][0])

    bal = {name: float("nan") for name in METRICS_COLUMNS[5:]}
    if lat.mu != 0.0:
        oracle = metrics.RateConstants.derived_oracle()
        literal = metrics.RateConstants.paper_literal()
        for label, series in (("h", inv_r["hamiltonian"]), ("i", inv_r["momentum"])):
            c_oracle = oracle.c_h if label == "h" else oracle.c_i
            c_literal = literal.c_h if label == "h" else literal.c_i
            r_oracle = metrics.balance_residuals(inv_r["time"], np.abs(series),
                                                 lat.mu, lat.dt, c_oracle)
            r_literal = metrics.balance_residuals(inv_r["time"], np.abs(series),
                                                  lat.mu, lat.dt, c_literal)
            bal[f"bal_{label}_meanabs_oracle"] = metrics.mean_absolute(r_oracle)
            bal[f"bal_{label}_meanabs_literal"] = metrics.mean_absolute(r_literal)
            bal[f"bal_{label}_template_literal"] = metrics.balance_aggregate(r_literal)

    rom_meta = json.loads((rom_dir / "rom_meta.json").read_text())
    n_r, n_d = rom_meta["n_r"], rom_meta["n_d"]

    out = root / f"compare_{n_r}_{n_d}"
    out.mkdir(parents=True, exist_ok=True)
    row = {
        "n_r": float(n_r),
        "n_d": float(n_d),
        "rel_err": rel,
        "cons_err_h": cons_h,
        "cons_err_i": cons_i,
        **bal,
    }
    write_csv(out / "metrics.csv", list(METRICS_COLUMNS),
              [np.array([row[c]]) for c in METRICS_COLUMNS])
    write_csv(out / "error_series.csv", ["time", "relative_error"], [times, err_t])
    print(f"compare: N_r={n_r} N_d={n_d} rel_err={rel:.6e} -> {out}")
    return out


def run_pipeline(cfg: RunConfig, out_root, modes: list[int] | None = None,
                 variant: str = "pod_deim") -> Path:
    """fom once, then reduce/rom/compare per mode count; writes table.csv."""
    if modes is not None and len(modes) == 0:
        raise ValueError("empty mode sweep")
    root = Path(out_root)
    root.mkdir(parents=True, exist_ok=True)
    fom_dir = run_fom(cfg, root)

    sweep = modes if modes is not None else [None]
    rows = []
    for count in sweep:
        reduce_dir = run_reduce(cfg, root, n_r=count, n_d=count)
        rom_dir = run_rom(cfg, root, reduce_dir, variant=variant)
        compare_dir = run_compare(cfg, root, fom_dir, rom_dir)
        rows.append(read_csv(compare_dir / "metrics.csv"))

    table = {c: np.array([r[c][0] for r in rows]) for c in METRICS_COLUMNS}
    write_csv(root / "table.csv", list(METRICS_COLUMNS),
              [table[c] for c in METRICS_COLUMNS])
    print(f"pipeline: {len(rows)} sweep entries -> {root / 'table.csv'}")
    return root
