import pytest

from app.cli import main
from tests.conftest import CONFIG_DIR

SMALL_FMCW = """
seed = 3

[chirp]
chirps_per_tx = 2

[[targets]]
range_m = 20.0
azimuth_deg = 10.0
rcs_dbsm = 0.44

[noise]
level_db = -90.0

[scene]
azimuths_deg = [0.0]
"""


def read_report(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# config_sha256=")
    return dict(line.split("=", 1) for line in lines[1:])


def run(tmp_path, name, *args, config=None):
    out = tmp_path / name
    argv = ["--out", str(out)]
    if config is not None:
        argv += ["--config", str(config)]
    return main(argv + list(args)), out


def write_config(tmp_path, text, name="config.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_link_report(tmp_path, capsys):
    code, out = run(tmp_path, "link", "link", config=CONFIG_DIR / "link.toml")
    assert code == 0
    report = read_report(out / "link_report.txt")
    assert float(report["detection_range"]) == pytest.approx(74.4, abs=0.1)
    assert float(report["sphere_rcs"]) == pytest.approx(-26.20, abs=0.05)
    assert float(report["tag_gain"]) == pytest.approx(31.44, abs=0.02)
    assert float(report["range_slope"]) == pytest.approx(-40.0, abs=0.5)
    assert "detection_range=" in capsys.readouterr().out
    csv_lines = (out / "link_report.csv").read_text(encoding="utf-8").splitlines()
    assert csv_lines[1] == "quantity,value,unit"


SMALL_SCAN = '[lens]\nmask_mode = "ideal"\nsamples_per_cell = 2\n\n[scan]\nz_start_mm = 15.0\nz_stop_mm = 25.0\nsteps = 11\nslice_steps = 3\n'
SMALL_SWEEP = "[lens]\nsamples_per_cell = 2\n\n[sweep]\nstart_deg = -40.0\nstop_deg = 40.0\nstep_deg = 10.0\n"


def assert_same_outputs(first, second):
    names = sorted(p.name for p in first.iterdir())
    assert names
    assert names == sorted(p.name for p in second.iterdir())
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()


@pytest.mark.parametrize(
    "command, source, extra",
    [
        ("link", "link.toml", []),
        ("calibrate", "calibrate.toml", []),
        ("synthesize", "synthesize.toml", []),
        ("focus-scan", SMALL_SCAN, ["--slice"]),
        ("rcs-sweep", SMALL_SWEEP, []),
    ],
)
def test_outputs_are_byte_identical_on_rerun(tmp_path, command, source, extra):
    config = CONFIG_DIR / source if source.endswith(".toml") else write_config(tmp_path, source)
    code_a, first = run(tmp_path, "a", "--threads", "2", command, *extra, config=config)
    code_b, second = run(tmp_path, "b", "--threads", "2", command, *extra, config=config)
    assert code_a == code_b == 0
    assert_same_outputs(first, second)


def test_hash_changes_with_config(tmp_path):
    _, base = run(tmp_path, "a", "link", config=CONFIG_DIR / "link.toml")
    _, seeded = run(tmp_path, "b", "--seed", "9", "link", config=CONFIG_DIR / "link.toml")
    first_line = lambda d: (d / "link_report.csv").read_text(encoding="utf-8").splitlines()[0]
    assert first_line(base) != first_line(seeded)


def test_calibrate_with_range_correction(tmp_path):
    code, out = run(tmp_path, "cal", "calibrate", config=CONFIG_DIR / "calibrate.toml")
    assert code == 0
    report = read_report(out / "calibration.txt")
    assert float(report["calibration_factor_db"]) == pytest.approx(33.80, abs=0.05)
    assert float(report["target_rcs_dbsm"]) == pytest.approx(-6.20 + 12.04, abs=0.06)


def test_synthesize_reproduces_library_column(tmp_path, capsys):
    code, out = run(tmp_path, "syn", "synthesize", config=CONFIG_DIR / "synthesize.toml")
    assert code == 0
    lens_lines = (out / "quantized_lens.csv").read_text(encoding="utf-8").splitlines()
    assert len(lens_lines) == 2 + 21 * 21
    assert (out / "profile_n11.csv").is_file() and (out / "profile_n21.csv").is_file()
    ring = (out / "ring_table.csv").read_text(encoding="utf-8").splitlines()
    assert ring[2].startswith('"(0,10)",')
    assert ",243.44," in ring[2]
    assert "(0,0)" in capsys.readouterr().out


def test_missing_library_names_path(tmp_path, capsys):
    config = write_config(tmp_path, '[lens]\nlibrary_path = "nowhere.csv"\n')
    code, _ = run(tmp_path, "syn", "synthesize", config=config)
    assert code == 1
    assert "nowhere.csv" in capsys.readouterr().err


def test_reversed_scan_range_is_validation_error(tmp_path):
    config = write_config(tmp_path, "[scan]\nz_start_mm = 30.0\nz_stop_mm = 10.0\n")
    code, out = run(tmp_path, "scan", "focus-scan", config=config)
    assert code == 1
    assert not out.exists()


@pytest.mark.parametrize("argv", [["bogus"], ["--threads", "x", "link"], []])
def test_bad_arguments(argv):
    assert main(argv) == 1


def test_unknown_config_key(tmp_path):
    config = write_config(tmp_path, "wavelength = 3\n")
    assert run(tmp_path, "x", "link", config=config)[0] == 1


def test_missing_config_file(tmp_path):
    assert run(tmp_path, "x", "link", config=tmp_path / "absent.toml")[0] == 1


def test_broken_toml(tmp_path):
    config = write_config(tmp_path, "[lens\n")
    assert run(tmp_path, "x", "link", config=config)[0] == 1


def test_target_beyond_range_is_validation_error(tmp_path):
    config = write_config(tmp_path, "[chirp]\nchirps_per_tx = 2\n\n[[targets]]\nrange_m = 120.0\namplitude = 1.0\n")
    assert run(tmp_path, "x", "fmcw", config=config)[0] == 1


def test_focus_scan_with_slice(tmp_path):
    config = write_config(
        tmp_path,
        '[lens]\nmask_mode = "ideal"\nsamples_per_cell = 2\n\n[scan]\nz_start_mm = 15.0\nz_stop_mm = 25.0\nsteps = 11\nslice_steps = 3\n',
    )
    code, out = run(tmp_path, "scan", "--threads", "2", "focus-scan", "--slice", config=config)
    assert code == 0
    report = read_report(out / "focus_summary.txt")
    assert 18.0 <= float(report["peak_z_mm"]) <= 22.0
    slice_lines = (out / "field_slice.csv").read_text(encoding="utf-8").splitlines()
    assert len(slice_lines) == 2 + 3 * 42


def test_rcs_sweep_both_modes(tmp_path):
    config = write_config(
        tmp_path,
        "[lens]\nsamples_per_cell = 2\n\n[sweep]\nstart_deg = -40.0\nstop_deg = 40.0\nstep_deg = 10.0\n",
    )
    code, out = run(tmp_path, "rcs", "rcs-sweep", config=config)
    assert code == 0
    assert len((out / "rcs_tag.csv").read_text(encoding="utf-8").splitlines()) == 2 + 9
    assert len((out / "rcs_patch.csv").read_text(encoding="utf-8").splitlines()) == 2 + 9
    comparison = (out / "comparison.csv").read_text(encoding="utf-8").splitlines()
    assert len(comparison) == 2 + 5 + 2
    report = read_report(out / "rcs_summary.txt")
    assert float(report["bragg_order_1_deg"]) == pytest.approx(50.3, abs=0.2)
    assert "rcs_improvement_db_19_40" in report


def test_fmcw_outputs(tmp_path):
    config = write_config(tmp_path, SMALL_FMCW)
    code, out = run(tmp_path, "fmcw", "fmcw", config=config)
    assert code == 0
    report = read_report(out / "fmcw_report.txt")
    assert float(report["bandwidth_ghz"]) == pytest.approx(4.19, abs=0.01)
    assert float(report["peak_range_m"]) == pytest.approx(20.0, abs=0.04)
    assert "peak_snr_db" in report
    assert "marker_delta_0deg_db" in report
    pgm = (out / "range_azimuth.pgm").read_bytes()
    lines = pgm.split(b"\n", 4)
    assert lines[0] == b"P5"
    assert lines[1].startswith(b"# config_sha256=")
    assert lines[2] == b"181 2048"
    assert lines[3] == b"255"
    assert len(lines[4]) == 181 * 2048


def test_fmcw_rerun_is_deterministic(tmp_path):
    config = write_config(tmp_path, SMALL_FMCW)
    _, first = run(tmp_path, "a", "fmcw", config=config)
    _, second = run(tmp_path, "b", "fmcw", config=config)
    for name in ("fmcw_report.txt", "range_azimuth.pgm", "imaging_study.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
