from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alrom import cli, pipeline
from alrom.config import (ConfigError, PodSettings, RunConfig, load_config,
                          parse_config, preset)
from alrom.matrixio import CorruptFileError, read_matrix, write_matrix


def tiny_config(mu=0.0, **kwargs):
    defaults = dict(experiment="custom", n_sites=32, half_length=8.0, gamma=1.0,
                    mu=mu, dt=0.01, t_final=0.5, eta=0.15, xi=0.4, phase=2.0,
                    snapshot_stride=5, pod=PodSettings(n_r=6, n_d=5))
    defaults.update(kwargs)
    return RunConfig(**defaults)


class TestMatrixFile:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((7, 11))
        write_matrix(tmp_path / "a.alrm", a)
        b = read_matrix(tmp_path / "a.alrm")
        np.testing.assert_array_equal(a, b)
        assert b.dtype == np.float64

    @given(rows=st.integers(1, 12), cols=st.integers(1, 12), seed=st.integers(0, 99))
    @settings(max_examples=25, deadline=None)
    def test_round_trip_random_shapes(self, rows, cols, seed, tmp_path_factory):
        a = np.random.default_rng(seed).standard_normal((rows, cols))
        path = tmp_path_factory.mktemp("mx") / "m.alrm"
        write_matrix(path, a)
        np.testing.assert_array_equal(read_matrix(path), a)

    def test_vector_promoted_to_column(self, tmp_path):
        write_matrix(tmp_path / "v.alrm", np.arange(5.0))
        assert read_matrix(tmp_path / "v.alrm").shape == (5, 1)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.alrm"
        write_matrix(path, np.ones((2, 2)))
        raw = bytearray(path.read_bytes())
        raw[:4] = b"NOPE"
        path.write_bytes(bytes(raw))
        with pytest.raises(CorruptFileError, match="magic"):
            read_matrix(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "short.alrm"
        write_matrix(path, np.ones((4, 4)))
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(CorruptFileError, match="length"):
            read_matrix(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "stub.alrm"
        path.write_bytes(b"ALRM")
        with pytest.raises(CorruptFileError, match="header"):
            read_matrix(path)


class TestConfig:
    def test_parse_overrides(self):
        cfg = parse_config(
            """
            experiment = custom
            lattice.n_sites = 48   # comment
            lattice.mu = 0.02
            pod.n_r = 7
            solver.abs_tol = 1e-10
            snapshots.stride = 2
            """
        )
        assert cfg.n_sites == 48
        assert cfg.mu == 0.02
        assert cfg.pod.n_r == 7
        assert cfg.solver.abs_tol == 1e-10
        assert cfg.snapshot_stride == 2

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config("lattice.n_site = 10")

    def test_unparseable_value_rejected(self):
        with pytest.raises(ConfigError, match="cannot parse"):
            parse_config("lattice.n_sites = ten")

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("just some words")

    def test_conservative_preset_parameters(self):
        cfg = preset("conservative_soliton")
        assert (cfg.n_sites, cfg.half_length, cfg.gamma, cfg.mu) == (200, 50.0, 1.0, 0.0)
        assert (cfg.dt, cfg.t_final, cfg.eta, cfg.xi) == (0.01, 50.0, 0.05, 0.5)
        assert cfg.snapshot_stride == 5
        assert cfg.lattice().mesh == 0.5

    def test_damped_preset_parameters(self):
        cfg = preset("damped_soliton")
        assert (cfg.n_sites, cfg.half_length, cfg.mu, cfg.t_final) == (512, 64.0, 0.01, 60.0)
        assert cfg.phase == 20.0
        assert cfg.gamma == 0.5  # soliton-matched nonlinearity normalization
        assert (cfg.pod.n_r, cfg.pod.n_d) == (40, 49)
        assert cfg.lattice().mesh == 0.25

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            preset("nonexistent")

    def test_config_on_top_of_preset(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("lattice.t_final = 1.0\n")
        cfg = load_config(path, base=preset("conservative_soliton"))
        assert cfg.t_final == 1.0
        assert cfg.n_sites == 200

    def test_invalid_stride(self):
        with pytest.raises(ConfigError):
            RunConfig(snapshot_stride=0)

    def test_zero_length_run_rejected(self):
        with pytest.raises(ConfigError):
            tiny_config(t_final=-1.0).lattice()


class TestFomStage:
    def test_two_snapshot_columns_when_horizon_is_one_step(self, tmp_path):
        cfg = tiny_config(t_final=0.01, snapshot_stride=1)
        out = pipeline.run_fom(cfg, tmp_path)
        snaps = read_matrix(out / "snapshots_p.alrm")
        assert snaps.shape == (32, 2)

    def test_conservative_invariant_drift_small(self, tmp_path):
        out = pipeline.run_fom(tiny_config(), tmp_path)
        inv = pipeline.read_csv(out / "invariants.csv")
        h = inv["hamiltonian"]
        assert np.max(np.abs(h - h[0])) / abs(h[0]) <= 1e-10

    def test_damped_geometric_decay_at_oracle_rate(self, tmp_path):
        cfg = tiny_config(mu=0.05)
        out = pipeline.run_fom(cfg, tmp_path)
        inv = pipeline.read_csv(out / "invariants.csv")
        h = inv["hamiltonian"]
        ratios = h[1:] / h[:-1]
        assert np.max(np.abs(ratios - np.exp(-2 * 0.05 * 0.01))) <= 1e-10


class TestReduceRomCompareStages:
    def test_full_rank_reduction_is_identity_accurate(self, tmp_path):
        # N_r = N makes the Galerkin projector the identity; the pod variant
        # then reproduces the FOM to solver tolerance
        cfg = tiny_config(snapshot_stride=1, pod=PodSettings(n_r=32, n_d=4))
        fom_dir = pipeline.run_fom(cfg, tmp_path)
        reduce_dir = pipeline.run_reduce(cfg, tmp_path)
        rom_dir = pipeline.run_rom(cfg, tmp_path, reduce_dir, variant="pod")
        compare_dir = pipeline.run_compare(cfg, tmp_path, fom_dir, rom_dir)
        row = pipeline.read_csv(compare_dir / "metrics.csv")
        assert row["rel_err"][0] <= 1e-8

    def test_reduce_rerun_is_byte_identical(self, tmp_path):
        cfg = tiny_config()
        pipeline.run_fom(cfg, tmp_path)
        out1 = pipeline.run_reduce(cfg, tmp_path)
        blob1 = {f.name: f.read_bytes() for f in sorted(out1.iterdir())}
        out2 = pipeline.run_reduce(cfg, tmp_path)
        blob2 = {f.name: f.read_bytes() for f in sorted(out2.iterdir())}
        assert blob1 == blob2

    def test_compare_rejects_grid_mismatch(self, tmp_path):
        cfg = tiny_config()
        fom_dir = pipeline.run_fom(cfg, tmp_path)
        reduce_dir = pipeline.run_reduce(cfg, tmp_path)
        rom_dir = pipeline.run_rom(cfg, tmp_path, reduce_dir)
        # corrupt the sampling grid by dropping a snapshot column
        lifted = read_matrix(rom_dir / "lifted_p.alrm")
        write_matrix(rom_dir / "lifted_p.alrm", lifted[:, :-1])
        with pytest.raises(ValueError, match="grids"):
            pipeline.run_compare(cfg, tmp_path, fom_dir, rom_dir)

    def test_rom_stage_persists_reduced_states(self, tmp_path):
        cfg = tiny_config()
        pipeline.run_fom(cfg, tmp_path)
        reduce_dir = pipeline.run_reduce(cfg, tmp_path)
        rom_dir = pipeline.run_rom(cfg, tmp_path, reduce_dir)
        reduced = read_matrix(rom_dir / "reduced_states.alrm")
        v_p = read_matrix(reduce_dir / "basis_p.alrm")
        v_q = read_matrix(reduce_dir / "basis_q.alrm")
        assert reduced.shape[0] == v_p.shape[1] + v_q.shape[1]
        lifted_p = read_matrix(rom_dir / "lifted_p.alrm")
        lifted_q = read_matrix(rom_dir / "lifted_q.alrm")
        np.testing.assert_array_equal(v_p @ reduced[:v_p.shape[1]], lifted_p)
        np.testing.assert_array_equal(v_q @ reduced[v_p.shape[1]:], lifted_q)

    def test_identical_inputs_give_zero_error_row(self, tmp_path):
        cfg = tiny_config()
        fom_dir = pipeline.run_fom(cfg, tmp_path)
        reduce_dir = pipeline.run_reduce(cfg, tmp_path)
        rom_dir = pipeline.run_rom(cfg, tmp_path, reduce_dir)
        # overwrite the lifted trajectory with the FOM snapshots themselves
        write_matrix(rom_dir / "lifted_p.alrm", read_matrix(fom_dir / "snapshots_p.alrm"))
        write_matrix(rom_dir / "lifted_q.alrm", read_matrix(fom_dir / "snapshots_q.alrm"))
        compare_dir = pipeline.run_compare(cfg, tmp_path, fom_dir, rom_dir)
        assert pipeline.read_csv(compare_dir / "metrics.csv")["rel_err"][0] == 0.0

    def test_empty_sweep_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="empty"):
            pipeline.run_pipeline(tiny_config(), tmp_path, modes=[])


def _tree_bytes(root: Path) -> dict[str, bytes]:
    return {str(f.relative_to(root)): f.read_bytes()
            for f in sorted(root.rglob("*")) if f.is_file()}


class TestDeterminism:
    def test_pipeline_reruns_byte_identical(self, tmp_path):
        cfg = tiny_config(mu=0.05)
        pipeline.run_pipeline(cfg, tmp_path / "one", modes=[5, 6])
        pipeline.run_pipeline(cfg, tmp_path / "two", modes=[5, 6])
        one, two = _tree_bytes(tmp_path / "one"), _tree_bytes(tmp_path / "two")
        assert one.keys() == two.keys()
        for name in one:
            assert one[name] == two[name], name
        table = pipeline.read_csv(tmp_path / "one" / "table.csv")
        assert len(table["n_r"]) == 2  # one row per sweep entry


class TestCliExitCodes:
    def test_success(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text(
            "experiment = custom\n"
            "lattice.n_sites = 32\nlattice.half_length = 8\n"
            "lattice.t_final = 0.05\ninitial.eta = 0.15\n"
            "pod.n_r = 4\npod.n_d = 4\n"
        )
        code = cli.main(["fom", "--config", str(cfg_file), "--out",
                         str(tmp_path / "out")])
        assert code == 0
        assert (tmp_path / "out" / "fom" / "invariants.csv").exists()

    def test_config_error_is_exit_2(self, tmp_path):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text("lattice.n_sites = 32\nbogus.key = 1\n")
        assert cli.main(["fom", "--config", str(cfg_file)]) == 2

    def test_missing_config_is_exit_2(self):
        assert cli.main(["fom"]) == 2

    def test_nonconvergence_is_exit_3(self, tmp_path):
        cfg_file = tmp_path / "stiff.cfg"
        cfg_file.write_text(
            "experiment = custom\n"
            "lattice.n_sites = 32\nlattice.half_length = 2\n"
            "lattice.dt = 1.0\nlattice.t_final = 2.0\ninitial.eta = 2.0\n"
            "solver.max_iters = 2\n"
        )
        assert cli.main(["fom", "--config", str(cfg_file), "--out",
                         str(tmp_path / "out")]) == 3

    def test_corrupt_file_is_exit_4(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text(
            "experiment = custom\n"
            "lattice.n_sites = 32\nlattice.half_length = 8\n"
            "lattice.t_final = 0.05\ninitial.eta = 0.15\n"
            "pod.n_r = 4\npod.n_d = 4\n"
        )
        out = tmp_path / "out"
        assert cli.main(["fom", "--config", str(cfg_file), "--out", str(out)]) == 0
        target = out / "fom" / "snapshots_p.alrm"
        target.write_bytes(target.read_bytes()[:-4])
        assert cli.main(["reduce", "--config", str(cfg_file), "--out",
                         str(out)]) == 4

    def test_bad_modes_list_is_exit_2(self, tmp_path):
        assert cli.main(["pipeline", "--preset", "conservative_soliton",
                         "--modes", "a,b", "--out", str(tmp_path)]) == 2
