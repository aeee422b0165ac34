import csv

import numpy as np
import pytest

from diskrd.cli import DEFAULTS, PRESETS, ConfigError, dump_eigen_table, main, parse_config, run
from diskrd.bessel import BoundaryCondition

from oracles import bessel_zero

SMALL_CONFIG = """
# tiny forced run for interface tests
variant = mode_forced
bc = zero_flux
diffusion = 5.0
mortality = 0.01
survival = 0.1
spread = 0.1
delay = 1.0
radius = 1.0
forcing_constant = 1.0
forcing_mode_k = 3.8317
n_max = 2
j_max = 3
w0_kind = trig_patch
w0_base = 0.2
w0_amp = 0.02
w0_kx = 3.0
w0_ky = 2.0
dt = 0.05
t_end = {t_end}
snapshot_every = 4
"""


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestParseConfig:
    def test_parses_comments_and_blanks(self, tmp_path):
        path = write_config(tmp_path, "# header\n\ndt = 0.5  # inline\n")
        assert parse_config(path) == {"dt": "0.5"}

    def test_rejects_unknown_key(self, tmp_path):
        path = write_config(tmp_path, "dly = 0.5\n")
        with pytest.raises(ConfigError, match="unknown config key: dly"):
            parse_config(path)

    def test_rejects_malformed_line(self, tmp_path):
        path = write_config(tmp_path, "just words\n")
        with pytest.raises(ConfigError, match="expected"):
            parse_config(path)


class TestRun:
    def test_zero_horizon_writes_projection(self, tmp_path):
        cfg = write_config(tmp_path, SMALL_CONFIG.format(t_end="0.0"))
        out = tmp_path / "out"
        assert run(cfg, out_dir=out) == 0
        files = {p.name for p in out.iterdir()}
        assert {"effective_config", "diagnostics.csv", "summary", "snapshot_0.csv"} <= files

        with open(out / "snapshot_0.csv") as fh:
            rows = list(csv.DictReader(fh))
        values = np.array([float(row["value"]) for row in rows])
        r = np.array([float(row["r"]) for row in rows])
        th = np.array([float(row["theta"]) for row in rows])
        # The dump is the truncated projection of the initial patch; its
        # flat part survives exactly under the zero-flux basis.
        mean = values.mean()
        assert mean == pytest.approx(0.2, abs=1e-3)
        assert np.all(np.isfinite(values)) and r.size == values.size and th.size == values.size

        summary = dict(
            line.split(" = ") for line in (out / "summary").read_text().splitlines()
        )
        assert summary["status"] == "completed"
        assert float(summary["terminal_time"]) == 0.0

    def test_determinism_bitwise(self, tmp_path):
        cfg = write_config(tmp_path, SMALL_CONFIG.format(t_end="0.5"))
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run(cfg, out_dir=out1) == 0
        assert run(cfg, out_dir=out2) == 0
        for name in ("diagnostics.csv", "summary", "snapshot_0.5.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_effective_config_lists_every_tunable(self, tmp_path):
        cfg = write_config(tmp_path, SMALL_CONFIG.format(t_end="0.0"))
        out = tmp_path / "out"
        assert run(cfg, out_dir=out) == 0
        keys = {
            line.split(" = ")[0]
            for line in (out / "effective_config").read_text().splitlines()
        }
        assert set(DEFAULTS) <= keys

    def test_missing_variant_names_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "dt = 0.5\n")
        assert run(cfg, out_dir=tmp_path / "out") == 2
        assert "variant" in capsys.readouterr().err

    def test_bad_value_names_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SMALL_CONFIG.format(t_end="soon"))
        assert run(cfg, out_dir=tmp_path / "out") == 2
        assert "t_end" in capsys.readouterr().err

    def test_unwritable_output_dir(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SMALL_CONFIG.format(t_end="0.0"))
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        assert run(cfg, out_dir=blocker / "sub") == 2
        assert "output_dir" in capsys.readouterr().err

    def test_blowup_exits_nonzero(self, tmp_path, capsys):
        text = SMALL_CONFIG.format(t_end="1.0").replace(
            "forcing_constant = 1.0", "forcing_constant = 1e20"
        )
        cfg = write_config(tmp_path, text)
        assert run(cfg, out_dir=tmp_path / "out") == 1
        assert "blew up" in capsys.readouterr().err

    def test_equilibria_reported_for_density_dependent_birth(self, tmp_path):
        text = SMALL_CONFIG.format(t_end="0.0").replace(
            "variant = mode_forced",
            "variant = mode_forced_birth\nbirth = ricker_quadratic",
        )
        cfg = write_config(tmp_path, text)
        out = tmp_path / "out"
        assert run(cfg, out_dir=out) == 0
        summary = dict(
            line.split(" = ") for line in (out / "summary").read_text().splitlines()
        )
        roots = [float(x) for x in summary["equilibria"].split(",")]
        assert roots[0] == 0.0 and len(roots) == 3

    def test_reference_scheme_via_config(self, tmp_path):
        text = SMALL_CONFIG.format(t_end="0.05") + (
            "scheme = reference_fd\nfd_n_r = 16\nfd_n_theta = 8\n"
        )
        cfg = write_config(tmp_path, text)
        out = tmp_path / "out"
        assert run(cfg, out_dir=out) == 0
        summary = dict(
            line.split(" = ") for line in (out / "summary").read_text().splitlines()
        )
        assert summary["status"] == "completed"
        effective = (out / "effective_config").read_text()
        assert "scheme = reference_fd" in effective

    def test_unknown_scheme_rejected(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, SMALL_CONFIG.format(t_end="0.0") + "scheme = magic\n"
        )
        assert run(cfg, out_dir=tmp_path / "out") == 2
        assert "scheme" in capsys.readouterr().err

    def test_preset_names_are_exposed(self):
        assert set(PRESETS) == {"fig2_extinction", "fig3_establishment"}

    def test_preset_overrides_individual_settings(self, tmp_path):
        from diskrd.cli import _resolve

        # Presets pin the experiment values even when the config disagrees.
        resolved = _resolve({"diffusion": "1.0", "t_end": "3.0"}, "fig2_extinction")
        assert resolved["diffusion"] == "5.0"
        assert resolved["t_end"] == "400.0"
        assert resolved["bc"] == "zero_flux"
        assert resolved["forcing_mode_k"] == "3.8317"
        assert resolved["preset"] == "fig2_extinction"
        establishment = _resolve({}, "fig3_establishment")
        assert establishment["birth"] == "ricker_quadratic"
        assert establishment["birth_scale"] == "0.25"
        assert establishment["birth_decay"] == "0.1"

    def test_unknown_preset_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "preset = nope\n")
        assert run(cfg, out_dir=tmp_path / "out") == 2
        assert "preset" in capsys.readouterr().err


class TestEigenTable:
    def read_rows(self, path):
        with open(path) as fh:
            return list(csv.DictReader(fh))

    def test_dirichlet_order_zero(self, tmp_path):
        path = tmp_path / "eig.csv"
        assert dump_eigen_table(0, 2, 1.0, BoundaryCondition.dirichlet(), path) == 0
        rows = self.read_rows(path)
        assert len(rows) == 2
        assert float(rows[0]["k"]) == pytest.approx(bessel_zero(0, 1), abs=1e-9)
        assert float(rows[1]["k"]) == pytest.approx(bessel_zero(0, 2), abs=1e-9)

    def test_order_one_row_present(self, tmp_path):
        path = tmp_path / "eig.csv"
        assert dump_eigen_table(1, 1, 1.0, BoundaryCondition.dirichlet(), path) == 0
        rows = self.read_rows(path)
        by_order = {row["n"]: float(row["k"]) for row in rows}
        assert by_order["1"] == pytest.approx(3.8317, abs=1e-4)

    def test_zero_flux_constant_mode_row(self, tmp_path):
        path = tmp_path / "eig.csv"
        assert dump_eigen_table(0, 1, 1.0, BoundaryCondition.zero_flux(), path) == 0
        rows = self.read_rows(path)
        assert float(rows[0]["k"]) == 0.0
        assert float(rows[0]["norm"]) == pytest.approx(0.5)

    def test_unwritable_path(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        status = dump_eigen_table(
            0, 1, 1.0, BoundaryCondition.dirichlet(), blocker / "sub" / "eig.csv"
        )
        assert status == 2
        assert "cannot write" in capsys.readouterr().err


class TestMain:
    def test_eigen_table_subcommand(self, tmp_path):
        out = tmp_path / "table.csv"
        status = main(
            ["eigen-table", "--n-max", "0", "--j-max", "2", "--radius", "1.0",
             "--bc", "dirichlet", "--out", str(out)]
        )
        assert status == 0
        assert out.exists()

    def test_run_requires_config_or_preset(self, capsys):
        assert main(["run"]) == 2
        assert "config" in capsys.readouterr().err

    def test_run_subcommand_with_config(self, tmp_path):
        cfg = write_config(tmp_path, SMALL_CONFIG.format(t_end="0.0"))
        status = main(["run", str(cfg), "--out", str(tmp_path / "out")])
        assert status == 0
