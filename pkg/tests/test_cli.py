import json
import subprocess
import sys

import jsonschema

from fellgeom.specfile import two_point_fixture_path

FIXTURE = str(two_point_fixture_path())
SCHEMA = json.loads(
    two_point_fixture_path().parent.joinpath("report.schema.json").read_text(encoding="utf-8")
)


def run_cli(*args, env=None):
    import os
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        [sys.executable, "-m", "fellgeom", *args],
        capture_output=True, text=True, env=full_env,
    )


class TestValidate:
    def test_fixture_passes(self):
        proc = run_cli("validate", FIXTURE)
        assert proc.returncode == 0, proc.stderr
        assert "grading" in proc.stdout

    def test_json_output_matches_schema(self):
        proc = run_cli("validate", FIXTURE, "--json")
        assert proc.returncode == 0
        report = json.loads(proc.stdout)
        jsonschema.validate(report, SCHEMA)
        assert set(report["checks"]) == {
            "grading", "order_zero", "saturated", "j_squared", "sheaf_axioms"}
        assert all(entry["pass"] for entry in report["checks"].values())

    def test_missing_file_exit_two(self):
        proc = run_cli("validate", "/nonexistent/geometry.json")
        assert proc.returncode == 2

    def test_invalid_file_exit_two(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"units": []}')
        proc = run_cli("validate", str(bad))
        assert proc.returncode == 2
        assert "units" in proc.stderr

    def test_bad_tolerance_env_exit_two(self):
        proc = run_cli("validate", FIXTURE, env={"FELLGEOM_TOL": "abc"})
        assert proc.returncode == 2

    def test_failing_check_exit_one(self, tmp_path):
        spec = json.loads(two_point_fixture_path().read_text(encoding="utf-8"))
        spec["j_squared"] = -1  # the permute-conjugate J realizes +1
        path = tmp_path / "badj.json"
        path.write_text(json.dumps(spec))
        proc = run_cli("validate", str(path), "--json")
        assert proc.returncode == 1
        report = json.loads(proc.stdout)
        assert not report["checks"]["j_squared"]["pass"]

    def test_partition_groupoid_validates(self, tmp_path):
        spec = json.loads(two_point_fixture_path().read_text(encoding="utf-8"))
        spec["groupoid"] = {"type": "partition",
                            "classes": [["L", "R"], ["Lbar", "Rbar"]]}
        del spec["dirac"]
        path = tmp_path / "partition.json"
        path.write_text(json.dumps(spec))
        proc = run_cli("validate", str(path), "--json")
        assert proc.returncode == 0
        report = json.loads(proc.stdout)
        assert report["checks"]["order_zero"]["pass"]


class TestDiracSpace:
    def test_default_constraints(self):
        proc = run_cli("dirac-space", FIXTURE, "--json")
        assert proc.returncode == 0
        report = json.loads(proc.stdout)
        jsonschema.validate(report, SCHEMA)
        solver = report["solver"]
        assert solver["total_dimension"] == 2
        assert len(solver["solutions"]) == 1
        assert solver["solutions"][0]["pattern"] == {
            "L": "R", "R": "L", "Lbar": "Rbar", "Rbar": "Lbar"}

    def test_dropping_s0(self):
        proc = run_cli("dirac-space", FIXTURE, "--json",
                       "--constraints", "self_adjoint,j_real,chi_anticommute")
        report = json.loads(proc.stdout)
        assert len(report["solver"]["solutions"]) == 2

    def test_slow_path_agrees(self):
        fast = json.loads(run_cli("dirac-space", FIXTURE, "--json").stdout)
        slow = json.loads(run_cli("dirac-space", FIXTURE, "--json", "--slow").stdout)
        assert fast["solver"] == slow["solver"]

    def test_max_units_cap(self):
        proc = run_cli("dirac-space", FIXTURE, "--max-units", "2")
        assert proc.returncode == 2
        assert "cap" in proc.stderr

    def test_expect_nonempty(self):
        proc = run_cli("dirac-space", FIXTURE, "--expect-nonempty")
        assert proc.returncode == 0

    def test_expect_nonempty_fails_on_empty_space(self, tmp_path):
        spec = {
            "name": "point",
            "units": [{"id": "a", "dim": 1, "chirality": 1, "sector": "particle"}],
            "conjugation": [["a", "a"]],
            "groupoid": {"type": "pair"},
            "constraints": ["chi_anticommute"],
        }
        path = tmp_path / "point.json"
        path.write_text(json.dumps(spec))
        proc = run_cli("dirac-space", str(path), "--expect-nonempty", "--json")
        assert proc.returncode == 1
        assert json.loads(proc.stdout)["solver"]["solutions"] == []

    def test_deterministic_output(self):
        a = run_cli("dirac-space", FIXTURE, "--json").stdout
        b = run_cli("dirac-space", FIXTURE, "--json").stdout
        assert a == b


class TestSpectrum:
    def test_masses(self):
        proc = run_cli("spectrum", FIXTURE, "--json")
        assert proc.returncode == 0
        report = json.loads(proc.stdout)
        jsonschema.validate(report, SCHEMA)
        assert report["spectrum"]["masses"] == [2.0, 2.0, 2.0, 2.0]
        assert report["spectrum"]["eigenvalues"] == [-2.0, -2.0, 2.0, 2.0]

    def test_missing_dirac_exit_two(self, tmp_path):
        spec = json.loads(two_point_fixture_path().read_text(encoding="utf-8"))
        del spec["dirac"]
        path = tmp_path / "nodirac.json"
        path.write_text(json.dumps(spec))
        proc = run_cli("spectrum", str(path))
        assert proc.returncode == 2
        assert "from-solver" in proc.stderr

    def test_from_solver(self, tmp_path):
        spec = json.loads(two_point_fixture_path().read_text(encoding="utf-8"))
        del spec["dirac"]
        path = tmp_path / "nodirac.json"
        path.write_text(json.dumps(spec))
        proc = run_cli("spectrum", str(path), "--from-solver", "0", "--json")
        assert proc.returncode == 0
        report = json.loads(proc.stdout)
        eigs = report["spectrum"]["eigenvalues"]
        assert len(eigs) == 4
        assert abs(eigs[0] + eigs[-1]) < 1e-9  # symmetric spectrum


class TestFluctuate:
    def test_identity_term(self, tmp_path):
        terms = [{"r": 1.0, "u": {u: [[1.0]] for u in ("L", "R", "Lbar", "Rbar")}}]
        tf = tmp_path / "terms.json"
        tf.write_text(json.dumps(terms))
        proc = run_cli("fluctuate", FIXTURE, "--terms", str(tf), "--json")
        assert proc.returncode == 0, proc.stderr
        report = json.loads(proc.stdout)
        jsonschema.validate(report, SCHEMA)
        assert all(entry["pass"] for entry in report["checks"].values())
        result = report["fluctuation"]["result"]
        assert result[0][1] == {"re": 2.0, "im": 0.0}

    def test_non_unitary_term_exit_two(self, tmp_path):
        terms = [{"r": 1.0, "u": {u: [[2.0]] for u in ("L", "R", "Lbar", "Rbar")}}]
        tf = tmp_path / "terms.json"
        tf.write_text(json.dumps(terms))
        proc = run_cli("fluctuate", FIXTURE, "--terms", str(tf))
        assert proc.returncode == 2
        assert "unitary" in proc.stderr

    def test_j_breaking_term_exit_one(self, tmp_path):
        terms = [
            {"r": 0.5, "u": {u: [[1.0]] for u in ("L", "R", "Lbar", "Rbar")}},
            {"r": 0.5, "u": {"L": [[-1.0]], "R": [[1.0]], "Lbar": [[1.0]], "Rbar": [[1.0]]}},
        ]
        tf = tmp_path / "terms.json"
        tf.write_text(json.dumps(terms))
        proc = run_cli("fluctuate", FIXTURE, "--terms", str(tf), "--json")
        assert proc.returncode == 1
        report = json.loads(proc.stdout)
        assert not report["checks"]["j_real"]["pass"]


class TestDistance:
    def test_l_to_r(self):
        proc = run_cli("distance", FIXTURE, "--from", "L", "--to", "R", "--json")
        assert proc.returncode == 0
        report = json.loads(proc.stdout)
        jsonschema.validate(report, SCHEMA)
        assert abs(report["distance"]["value"] - 0.5) < 1e-6

    def test_same_unit(self):
        proc = run_cli("distance", FIXTURE, "--from", "L", "--to", "L", "--json")
        report = json.loads(proc.stdout)
        assert report["distance"]["value"] == 0.0

    def test_unknown_unit_exit_two(self):
        proc = run_cli("distance", FIXTURE, "--from", "L", "--to", "XX")
        assert proc.returncode == 2


class TestReport:
    def test_full_report(self, tmp_path):
        out = tmp_path / "report.json"
        proc = run_cli("report", FIXTURE, "--json", str(out))
        assert proc.returncode == 0
        report = json.loads(out.read_text())
        jsonschema.validate(report, SCHEMA)
        assert report["solver"]["total_dimension"] == 2
        assert report["spectrum"]["masses"] == [2.0, 2.0, 2.0, 2.0]
        assert report["tool"]["name"] == "fellgeom"
        assert len(report["input"]["sha256"]) == 64

    def test_byte_identical_reports(self, tmp_path):
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        run_cli("report", FIXTURE, "--json", str(out1))
        run_cli("report", FIXTURE, "--json", str(out2))
        assert out1.read_bytes() == out2.read_bytes()
