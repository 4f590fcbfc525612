import json
import subprocess
import sys

import pytest

from multilocal.cli import EXIT_CONFIG, EXIT_FAILED_RUNS, EXIT_IO, EXIT_OK, main


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"problems": ["branin"], "algorithms": ["mmlhs", "restart_cmaes"],
                                "budget": 12, "replications": 2, "base_seed": 5}))
    return path


def test_run_report_plot(tmp_path, config, capsys):
    traces, agg, svg = tmp_path / "t.csv", tmp_path / "a.csv", tmp_path / "p.svg"
    assert main(["run", str(config), "-o", str(traces)]) == EXIT_OK
    assert len(traces.read_text().splitlines()) == 1 + 2 * 2 * 12
    assert main(["report", str(traces), "-o", str(agg)]) == EXIT_OK
    assert main(["plot", str(agg), "--metric", "f_delta", "-o", str(svg)]) == EXIT_OK
    assert "<svg" in svg.read_text()


def test_run_is_byte_stable_apart_from_time(tmp_path, config):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["run", str(config), "-o", str(a)])
    main(["run", str(config), "-o", str(b)])
    strip = lambda p: [line.rsplit(",", 1)[0] for line in p.read_text().splitlines()]
    assert strip(a) == strip(b)


def test_exit_codes(tmp_path, monkeypatch):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"problems": ["branin"], "algorithms": ["mmlhs"], "extra": 1}))
    assert main(["run", str(bad)]) == EXIT_CONFIG
    assert main(["run", str(tmp_path / "absent.json")]) == EXIT_IO
    assert main(["report", str(tmp_path / "absent.csv")]) == EXIT_IO

    from multilocal import bench

    def boom(*args, **kwargs):
        raise RuntimeError("no")

    monkeypatch.setattr(bench.cmaes, "restart_cmaes", boom)
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"problems": ["branin"], "algorithms": ["restart_cmaes", "mmlhs"],
                                "budget": 8, "replications": 1}))
    out = tmp_path / "t.csv"
    assert main(["run", str(good), "-o", str(out)]) == EXIT_FAILED_RUNS
    assert out.exists()


def test_registry_check_and_demo(tmp_path, capsys):
    assert main(["registry", "branin", "six_hump_camelback"]) == EXIT_OK
    assert "matches" in capsys.readouterr().out
    svg = tmp_path / "nbc.svg"
    assert main(["demo-nbc", "-o", str(svg)]) == EXIT_OK
    assert "<svg" in svg.read_text()


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "multilocal", "--help"], capture_output=True,
                         text=True, check=True)
    for cmd in ("run", "report", "plot", "registry", "demo-nbc"):
        assert cmd in out.stdout
