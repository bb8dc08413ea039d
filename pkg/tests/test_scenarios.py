import math

import numpy as np
import pytest

from dlrflow.grids import SpatialGrid, gradient_x
from dlrflow.scenarios import (
    ConfigError,
    DIAG_HEADER,
    ScenarioConfig,
    init_shear_flow,
    init_sound_wave,
    load_config,
    parse_config_text,
    read_snapshot,
    run,
    vorticity,
    write_snapshot,
)


# --- config parsing -----------------------------------------------------------

def test_parse_and_validate_roundtrip(tmp_path):
    cfg_text = """
    # sound wave, quick
    scenario = sound_wave
    solver = lowrank
    n_x = 32
    n_v = 16
    rank = 6
    epsilon = 1e-2
    tau = 0.1
    t_end = 0.2
    snapshot_times = 0.1, 0.2
    seed = 3
    """
    path = tmp_path / "cfg.txt"
    path.write_text(cfg_text)
    cfg = load_config(path)
    assert cfg.n_x == 32 and cfg.seed == 3
    assert cfg.snapshot_times == (0.1, 0.2)
    assert cfg.delta == pytest.approx(1e-3)  # scenario default


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config_text("n_y = 3")


def test_epsilon_xor_reynolds():
    with pytest.raises(ConfigError, match="epsilon and reynolds"):
        ScenarioConfig(epsilon=1e-3, reynolds=300.0).validate()
    with pytest.raises(ConfigError, match="epsilon and reynolds"):
        ScenarioConfig().validate()
    cfg = ScenarioConfig(reynolds=300.0, v0=0.1).validate()
    assert cfg.epsilon_value == pytest.approx(1.0 / 3000.0)


def test_spectral_requires_power_of_two():
    with pytest.raises(ConfigError, match="power"):
        ScenarioConfig(epsilon=1e-3, n_x=96, backend="spectral").validate()


def test_snapshot_times_must_align():
    with pytest.raises(ConfigError, match="multiple of tau"):
        ScenarioConfig(epsilon=1e-3, tau=0.2,
                       snapshot_times=(0.3,)).validate()


def test_bad_values_rejected():
    with pytest.raises(ConfigError):
        ScenarioConfig(epsilon=1e-3, scenario="vortex").validate()
    with pytest.raises(ConfigError):
        ScenarioConfig(epsilon=1e-3, rank=4).validate()
    with pytest.raises(ConfigError):
        ScenarioConfig(epsilon=-1.0).validate()


# --- initial data ---------------------------------------------------------------

def test_sound_wave_values():
    grid = SpatialGrid(64)
    cfg = ScenarioConfig(epsilon=1e-3).validate()
    rho0, u0 = init_sound_wave(cfg, grid)
    iy = 16  # y = 0.25
    assert rho0[0, iy] == pytest.approx(1.001)
    assert abs(np.mean(rho0) - 1.0) < 1e-12
    assert np.max(np.abs(u0[0])) == 0.0


def test_shear_flow_values():
    grid = SpatialGrid(64)
    cfg = ScenarioConfig(epsilon=1e-3, scenario="shear_flow").validate()
    rho0, u0 = init_shear_flow(cfg, grid)
    assert np.all(rho0 == 1.0)
    iy = 16  # y = 0.25
    assert u0[0][0, iy] == pytest.approx(0.0, abs=1e-14)
    iy = 32  # y = 0.5
    assert u0[0][0, iy] == pytest.approx(0.1 * math.tanh(7.5), rel=1e-12)
    assert np.max(np.abs(u0[1])) == pytest.approx(5e-3)


# --- vorticity ------------------------------------------------------------------

def test_vorticity_of_gradient_field_vanishes():
    grid = SpatialGrid(64)
    phi = np.sin(2 * np.pi * grid.x1) * np.cos(4 * np.pi * grid.x2)
    u1, u2 = gradient_x(phi, grid, "spectral")
    w = vorticity(u1, u2, grid, "spectral")
    assert np.max(np.abs(w)) < 1e-10


def test_vorticity_rigid_shear_locally():
    grid = SpatialGrid(128)
    a = 0.4
    u1 = (a / (2 * np.pi)) * np.sin(2 * np.pi * grid.x2)
    u2 = np.zeros(grid.shape)
    w = vorticity(u1, u2, grid, "spectral")
    # near y=0 the profile is a*y, so omega = -a
    assert w[0, 0] == pytest.approx(-a, rel=1e-3)


def test_vorticity_shear_layer_peaks():
    grid = SpatialGrid(128)
    cfg = ScenarioConfig(epsilon=1e-3, scenario="shear_flow").validate()
    _, u0 = init_shear_flow(cfg, grid)
    w = vorticity(u0[0], u0[1], grid, "spectral")
    assert np.max(np.abs(w)) == pytest.approx(cfg.v0 / cfg.shear_width, rel=0.05)


# --- snapshots ------------------------------------------------------------------

def test_snapshot_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    arr = rng.standard_normal((16, 16))
    meta_path = write_snapshot(tmp_path, "rho", 0.25, arr)
    back, meta = read_snapshot(meta_path)
    assert np.array_equal(back, arr)
    assert meta["field"] == "rho"
    assert float(meta["time"]) == 0.25
    assert meta["byte_order"] == "little"


def test_snapshot_payload_length_check(tmp_path):
    arr = np.zeros((8, 8))
    meta_path = write_snapshot(tmp_path, "u1", 0.0, arr)
    (tmp_path / "snap_u1_0.000000.bin").write_bytes(b"\x00" * 8)
    with pytest.raises(ValueError):
        read_snapshot(meta_path)


# --- driver ---------------------------------------------------------------------

def quick_cfg(tmp_path, **kw):
    base = dict(scenario="sound_wave", solver="lowrank", n_x=32, n_v=16,
                rank=6, epsilon=1e-2, tau=0.1, t_end=0.2,
                snapshot_times=(0.2,), out_dir=str(tmp_path / "out"), seed=1)
    base.update(kw)
    return ScenarioConfig(**base).validate()


def test_run_lowrank_outputs(tmp_path):
    cfg = quick_cfg(tmp_path)
    res = run(cfg)
    diag = (res.out_dir / "diagnostics.csv").read_text().splitlines()
    assert diag[0] == DIAG_HEADER
    assert len(diag) == 1 + 3  # header + t=0 + two steps
    assert res.lowrank_steps == 2
    names = sorted(p.name for p in res.out_dir.glob("snap_*.meta"))
    assert names == ["snap_rho_0.200000.meta", "snap_u1_0.200000.meta",
                     "snap_u2_0.200000.meta", "snap_vorticity_0.200000.meta"]


def test_run_is_deterministic(tmp_path):
    cfg1 = quick_cfg(tmp_path, out_dir=str(tmp_path / "a"))
    cfg2 = quick_cfg(tmp_path, out_dir=str(tmp_path / "b"))
    r1, r2 = run(cfg1), run(cfg2)
    d1 = (r1.out_dir / "diagnostics.csv").read_bytes()
    d2 = (r2.out_dir / "diagnostics.csv").read_bytes()
    assert d1 == d2
    s1 = (r1.out_dir / "snap_rho_0.200000.bin").read_bytes()
    s2 = (r2.out_dir / "snap_rho_0.200000.bin").read_bytes()
    assert s1 == s2


def test_run_maccormack_outputs(tmp_path):
    cfg = quick_cfg(tmp_path, solver="maccormack", t_end=0.05,
                    snapshot_times=(0.05,))
    res = run(cfg)
    diag = (res.out_dir / "diagnostics.csv").read_text().splitlines()
    assert len(diag) == 2 + res.reference_steps
    row = diag[1].split(",")
    assert len(row) == 9
    assert math.isnan(float(row[6]))  # smin is lowrank-only


def test_run_both_writes_errors_and_reference(tmp_path):
    cfg = quick_cfg(tmp_path, solver="both")
    res = run(cfg)
    lines = (res.out_dir / "diagnostics.csv").read_text().splitlines()
    last = lines[-1].split(",")
    assert not math.isnan(float(last[7]))  # err_rho present
    assert not math.isnan(float(last[8]))  # err_u present
    assert (res.out_dir / "reference" / "snap_rho_0.200000.meta").exists()
    # the two solvers track each other on this short smooth run
    assert float(last[7]) < 1e-3


def test_run_rejects_unaligned_t_end(tmp_path):
    cfg = quick_cfg(tmp_path, t_end=0.25)
    with pytest.raises(ConfigError, match="multiple of tau"):
        run(cfg)


def test_cli_round_trip(tmp_path, capsys):
    from dlrflow.cli import main
    cfg_file = tmp_path / "c.txt"
    cfg_file.write_text("scenario = sound_wave\nn_x = 32\nn_v = 16\nrank = 6\n"
                        "epsilon = 1e-2\ntau = 0.1\nt_end = 0.1\n")
    code = main(["--config", str(cfg_file), "--out", str(tmp_path / "o"),
                 "--seed", "2"])
    assert code == 0
    assert (tmp_path / "o" / "diagnostics.csv").exists()


def test_cli_config_error_exit_code(tmp_path):
    from dlrflow.cli import main
    bad = tmp_path / "bad.txt"
    bad.write_text("epsilon = 1e-3\nreynolds = 300\n")
    assert main(["--config", str(bad)]) == 2
