import json
import math

import numpy as np
import pytest

from negrefract import scan
from negrefract.cli import main
from negrefract.errors import ConfigurationError
from negrefract.params import CONFIG_DEFAULTS


@pytest.fixture
def cfg():
    return dict(CONFIG_DEFAULTS)


def _data_rows(text):
    return [ln for ln in text.splitlines() if ln and not ln.startswith("#")][1:]


class TestSweepSpec:
    @pytest.mark.parametrize("kw", [
        dict(points=1), dict(start=1.0, stop=0.0), dict(scale="log", start=0.0),
        dict(variable="colour"), dict(scale="cubic"),
    ])
    def test_invalid(self, kw):
        base = dict(variable="detuning", start=-1.0, stop=1.0, points=3)
        with pytest.raises(ConfigurationError):
            scan.SweepSpec(**{**base, **kw})

    def test_log_values(self):
        v = scan.SweepSpec("density", 1e14, 1e17, 4, "log").values()
        assert np.allclose(v, [1e14, 1e15, 1e16, 1e17])


class TestSpectrum:
    def test_row_count_and_header(self, cfg):
        res = scan.run_spectrum(cfg, points=2001)
        text = scan.to_csv(res)
        assert res.n_rows == 2001
        assert len(_data_rows(text)) == 2001
        header = [ln for ln in text.splitlines() if ln.startswith("# ")]
        keys = {ln[2:].split(" = ")[0] for ln in header}
        for k in ("command", "package_version", "unit_convention", "config.density_cm3", "param.gamma2"):
            assert k in keys

    def test_columns_complete(self, cfg):
        res = scan.run_spectrum(cfg, points=11)
        names, _ = scan._flatten(res.columns)
        for k in ("aEE", "aEB", "aBE", "aBB", "eps", "mu", "xiEH", "xiHE", "n", "zinv"):
            assert f"{k}_re" in names and f"{k}_im" in names
        for k in ("fom", "branch", "error"):
            assert k in names

    def test_low_density_has_no_negative_index(self, cfg):
        cfg["density_cm3"] = 5e14
        res = scan.run_spectrum(cfg, points=2001)
        assert res.metadata["units"] == "gamma2"
        assert np.min(res.columns["n"].real) > 0

    def test_high_density_negative_index(self, cfg):
        res = scan.run_spectrum(cfg, points=2001)
        x = res.columns["Delta_gammap"]
        n = res.columns["n"]
        k = int(np.argmin(n.real))
        assert n.real[k] < 0
        assert abs(x[k] + 0.045) <= 0.02

    def test_nonchiral_control(self, cfg):
        res = scan.run_spectrum(cfg, points=401, nonchiral=True)
        for k in ("aEB", "aBE", "xiEH", "xiHE"):
            assert np.all(res.columns[k] == 0)

    def test_json_mirrors_csv(self, cfg):
        res = scan.run_spectrum(cfg, points=7)
        js = json.loads(scan.to_json(res))
        names, _ = scan._flatten(res.columns)
        assert js["columns"] == names
        assert len(js["rows"]) == 7
        csv_rows = _data_rows(scan.to_csv(res))
        for jrow, crow in zip(js["rows"], csv_rows):
            cells = crow.split(",")
            for a, b in zip(jrow, cells):
                if isinstance(a, float):
                    assert a == float(b)


class TestOtherScans:
    def test_phase(self, cfg):
        res = scan.run_phase(cfg, points=5, start=0.0, stop=2 * math.pi)
        n = res.columns["n"]
        xi = res.columns["xiEH"]
        assert res.n_rows == 5
        # phi = pi/2 and 3pi/2
        assert n.real[1] < 0 < n.real[3]
        q = res.columns["aEB"]
        assert q[2] == -q[0] or abs(q[2] + q[0]) < 1e-14 * abs(q[0])
        assert abs(xi[3] + xi[1]) < 1e-12 * abs(xi[1])

    def test_phase_exact_negation(self, cfg):
        a = scan.run_phase(cfg, points=2, start=0.3, stop=1.0)
        b = scan.run_phase(cfg, points=2, start=0.3 + math.pi, stop=1.0 + math.pi)
        for k in ("aEB", "aBE"):
            np.testing.assert_allclose(b.columns[k], -a.columns[k], rtol=1e-13)

    def test_density(self, cfg):
        res = scan.run_density(cfg, points=61)
        assert res.n_rows == 61
        assert np.all(res.columns["mu"].real > 0)
        xe, xh = res.columns["xiEH"].imag, res.columns["xiHE"].imag
        assert np.all(np.sign(xe) == -np.sign(xh))
        assert abs(xe[-1]) > abs(xe[0]) and abs(xh[-1]) > abs(xh[0])
        im = res.columns["n"].imag
        k = int(np.argmax(im))
        assert 0 < k < len(im) - 1

    def test_tunability(self, cfg):
        res = scan.run_tunability(cfg, points=121)
        x = res.columns["omegac_over_gamma3"]
        n = res.columns["n"]
        near = (x > 0.5) & (x < 2.0)
        assert np.any(np.abs(n.real[near] + 1) < 0.3)
        k = int(np.argmin(n.real))
        assert abs(n.real[-1]) < abs(n.real[k])
        j = int(np.argmin(np.abs(n.real + 1)))
        assert n.imag[j] < 0.1

    def test_angle(self, cfg):
        res = scan.run_angle(cfg, points=181)
        n = res.columns["n"]
        assert res.n_rows == 181
        ref = scan.run_spectrum(cfg, points=3, start=-0.035, stop=0.0)
        assert n[0] == pytest.approx(ref.columns["n"][0], rel=1e-13)
        m = res.metadata
        eps, mu, xe, xh = (m[f"operating_point.{k}"] for k in ("eps", "mu", "xiEH", "xiHE"))
        assert n[90] == pytest.approx(np.sqrt(eps * mu - xe * xh), rel=1e-13)
        assert n.real.min() < 0 < n.real.max()

    def test_saturation(self, cfg):
        res = scan.run_saturation(cfg, points=101)
        amp = res.columns["OmegaE_gamma2"]
        assert res.n_rows == 3 * 101
        dev = {a: np.max([res.columns[k][amp == a] for k in res.columns if k.startswith("dev_")], axis=0)
               for a in (1e-3, 1.0, 10.0)}
        assert np.max(dev[10.0]) <= -2 and np.max(dev[1.0]) <= -2
        assert np.max(dev[1e-3]) <= -5
        assert np.mean(dev[10.0] >= dev[1.0]) > 0.5

    def test_saturation_ordering_is_deterministic(self, cfg):
        a = scan.run_saturation(cfg, points=9, amplitudes=(1.0, 10.0), workers=1)
        b = scan.run_saturation(cfg, points=9, amplitudes=(1.0, 10.0), workers=4)
        assert scan.to_csv(a) == scan.to_csv(b)

    def test_impedance_vacuum(self, cfg):
        res, rep = scan.run_impedance_find(cfg, density=0.0, n_target=None)
        assert rep.found
        assert rep.zinv == pytest.approx(1.0)
        assert rep.n == pytest.approx(1.0)
        assert res.metadata["status"] == "found"

    def test_bad_units(self, cfg):
        cfg["gammap_over_gamma2"] = 0.0
        with pytest.raises(ConfigurationError):
            scan.run_spectrum(cfg, points=3, units="gammap")


class TestCommandLine:
    def test_spectrum_exit_zero(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        assert main(["spectrum", "--points", "21", "--out", str(out)]) == 0
        assert len(_data_rows(out.read_text())) == 21

    def test_stdout(self, capsys):
        assert main(["nonchiral", "--points", "5"]) == 0
        assert len(_data_rows(capsys.readouterr().out)) == 5

    def test_json_format(self, tmp_path):
        out = tmp_path / "p.json"
        assert main(["phase", "--points", "4", "--format", "json", "--out", str(out)]) == 0
        js = json.loads(out.read_text())
        assert js["metadata"]["command"] == "phase" and len(js["rows"]) == 4

    def test_rerun_from_header_is_bit_exact(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["spectrum", "--points", "31", "--density", "2e16", "--units", "gamma2",
                     "--set", "omegac_phase_rad=1.2", "--out", str(a)]) == 0
        assert main(["spectrum", "--from-header", str(a), "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_config_file(self, tmp_path):
        conf = tmp_path / "run.cfg"
        conf.write_text("density_cm3 = 5e14\n")
        out = tmp_path / "o.csv"
        assert main(["spectrum", "--config", str(conf), "--points", "3", "--out", str(out)]) == 0
        assert scan.read_metadata(out)["config.density_cm3"] == 5e14

    def test_fatal_config_exit_one(self, tmp_path, capsys):
        conf = tmp_path / "bad.cfg"
        conf.write_text("no_such_key = 1\n")
        assert main(["spectrum", "--config", str(conf)]) == 1
        assert main(["spectrum", "--set", "bogus"]) == 1
        assert main(["spectrum", "--config", str(tmp_path / "missing.cfg")]) == 1

    def test_bad_arguments_exit_one(self):
        with pytest.raises(SystemExit) as exc:
            main(["spectrum", "--format", "xml"])
        assert exc.value.code == 1

    def test_row_errors_exit_two(self, tmp_path, monkeypatch):
        from negrefract import pipeline
        from negrefract.errors import LocalFieldSingularityError

        real = pipeline.local_field_correct

        def flaky(q, density, **kw):
            # vector call fails, then every point with Re aEE < 0 fails on its own
            if np.ndim(q.aEE) > 0 or np.real(q.aEE) < 0:
                raise LocalFieldSingularityError("forced", indices=[0])
            return real(q, density, **kw)

        monkeypatch.setattr(pipeline, "local_field_correct", flaky)
        out = tmp_path / "e.csv"
        assert main(["spectrum", "--points", "9", "--out", str(out)]) == 2
        assert len(_data_rows(out.read_text())) == 9
        res = scan.run_spectrum(dict(CONFIG_DEFAULTS), points=9)
        flagged = np.array([e != "" for e in res.columns["error"]])
        assert flagged.any() and not flagged.all()
        assert np.array_equal(np.isnan(res.columns["n"]), flagged)
