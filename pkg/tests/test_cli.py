import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from reducible_anosov.blocks import RepSpec, beta_eval
from reducible_anosov.cli import EXIT_ERROR, EXIT_NOT_ANOSOV, EXIT_OK, UsageError, main, parse_theta
from reducible_anosov.io import (
    ConfigFileError,
    fixture_names,
    fixture_path,
    load_rep,
    parse_entry,
    rep_from_json,
    rep_to_json,
)


def worked_doc():
    return json.loads(fixture_path("worked_example").read_text())


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


class TestConfigParsing:
    def test_entries(self):
        assert parse_entry("1/3", False) == pytest.approx(1 / 3)
        assert parse_entry("-2.5", False) == -2.5
        assert parse_entry(4, False) == 4.0
        assert parse_entry("1+2i", True) == 1 + 2j
        assert parse_entry("3/4", True) == 0.75
        with pytest.raises(ConfigFileError):
            parse_entry("1+2i", False)
        with pytest.raises(ConfigFileError):
            parse_entry(True, False)

    def test_fixtures_load(self):
        names = fixture_names()
        assert {"worked_example", "worked_example_upper", "trivial", "parabolic", "schottky_pair"} <= set(names)
        for n in names:
            rep, digest = load_rep(fixture_path(n))
            assert len(digest) == 64 and rep.group.rank == 2

    def test_flat_and_nested_agree(self):
        doc = worked_doc()
        flat = json.loads(json.dumps(doc))
        flat["images"] = {k: [x for r in v for x in r] for k, v in doc["images"].items()}
        a, b = rep_from_json(doc), rep_from_json(flat)
        assert all(np.array_equal(x, y) for x, y in zip(a.images, b.images))

    def test_roundtrip(self):
        rep = rep_from_json(worked_doc())
        back = rep_from_json(rep_to_json(rep))
        assert all(np.array_equal(x, y) for x, y in zip(rep.images, back.images))

    def test_wrong_size_reports_location(self):
        doc = worked_doc()
        doc["images"]["b"] = doc["images"]["b"][:2]
        with pytest.raises(ConfigFileError, match="images.b"):
            rep_from_json(doc)

    def test_block_det_checked(self):
        doc = worked_doc()
        doc["images"]["a"][0][0] = "6"
        with pytest.raises(ConfigFileError, match="block normalized"):
            rep_from_json(doc)

    def test_missing_generator(self):
        doc = worked_doc()
        del doc["images"]["b"]
        with pytest.raises(ConfigFileError, match="missing"):
            rep_from_json(doc)

    def test_complex_field(self):
        doc = {
            "group": {"rank": 2},
            "decomposition": {"dims": [2]},
            "scalar_field": "complex",
            "images": {"a": [["2i", "0"], ["0", "1"]], "b": ["1", "1+i", "0", "1"]},
        }
        rep = rep_from_json(doc)
        assert rep.images[0][0, 0] == 2j and rep.images[1][0, 1] == 1 + 1j
        doc["group"]["rank"] = 1
        with pytest.raises(ConfigFileError):
            rep_from_json(doc)

    def test_basis_conjugation(self):
        doc = worked_doc()
        doc["structure"] = "general"
        doc["decomposition"]["basis"] = [["1", "1", "0"], ["0", "1", "0"], ["0", "0", "1"]]
        rep = rep_from_json(doc)
        p = np.array([[1.0, 1, 0], [0, 1, 0], [0, 0, 1]])
        assert np.allclose(p @ rep.images[0] @ np.linalg.inv(p), np.diag([3, 1 / 3, 1]))


class TestTheta:
    def test_parse(self):
        assert parse_theta(None, 3).members == (1, 2)
        assert parse_theta("all", 3).members == (1, 2)
        assert parse_theta("none", 3).members == ()
        assert parse_theta("2, 1", 4).members == (1, 2)
        with pytest.raises(UsageError):
            parse_theta("x", 3)
        with pytest.raises((UsageError, ValueError)):
            parse_theta("3", 3)


class TestCommands:
    def test_validate(self, tmp_path, capsys):
        assert main(["validate", str(fixture_path("worked_example"))]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["valid"] and doc["dims"] == [2, 1]
        assert doc["checks"]["block_abs_dets"][0] == pytest.approx([1.0, 1.0])

    def test_validate_rejects(self, tmp_path, capsys):
        doc = worked_doc()
        doc["images"]["a"][0][0] = "6"
        assert main(["validate", write(tmp_path, "bad.json", doc)]) == EXIT_ERROR
        assert "block normalized" in capsys.readouterr().err
        doc = worked_doc()
        doc["images"]["a"] = doc["images"]["a"][:2]
        assert main(["validate", write(tmp_path, "bad2.json", doc)]) == EXIT_ERROR
        assert "images.a" in capsys.readouterr().err

    def test_eigconfig_table(self, capsys):
        assert main(["eigconfig", str(fixture_path("worked_example")), "--word", "a"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "word: a"
        assert lines[2].split() == ["1", "1", "0"]
        assert lines[3].split() == ["2", "1", "1"]

    def test_eigconfig_general_rejected(self, capsys):
        assert main(["eigconfig", str(fixture_path("parabolic")), "--word", "a"]) == EXIT_ERROR

    def test_certify(self, tmp_path, capsys):
        out, series = tmp_path / "c.json", tmp_path / "c.csv"
        rc = main(["certify", str(fixture_path("worked_example")), "--max-len", "6",
                   "--out", str(out), "--csv", str(series)])
        assert rc == EXIT_OK
        assert "verdict: plausibly_anosov" in capsys.readouterr().out
        doc = json.loads(out.read_text())
        assert doc["manifest"]["parameters"]["max_length"] == 6
        assert doc["report"]["unique_config"]["q"] == {"1": {"1": 1, "2": 1}, "2": {"1": 0, "2": 1}}
        lines = series.read_text().splitlines()
        assert lines[0].startswith("# manifest: ")
        rows = list(csv.DictReader(lines[1:]))
        assert rows[0] == {"word": "a", "length": "1", "k": "1", "gap": rows[0]["gap"]}
        assert float(rows[0]["gap"]) == pytest.approx(np.log(3))

    def test_certify_not_anosov(self, capsys):
        assert main(["certify", str(fixture_path("trivial")), "--max-len", "3"]) == EXIT_NOT_ANOSOV
        assert main(["certify", str(fixture_path("parabolic")), "--max-len", "3"]) == EXIT_NOT_ANOSOV

    def test_certify_deterministic(self, tmp_path):
        outs = []
        for i in range(2):
            p = tmp_path / f"r{i}.json"
            main(["certify", str(fixture_path("worked_example")), "--max-len", "5", "--out", str(p)])
            outs.append(p.read_bytes())
        assert outs[0] == outs[1]

    def test_domain_then_slice(self, tmp_path):
        poly = tmp_path / "d.json"
        assert main(["domain", str(fixture_path("worked_example")), "--max-len", "4", "--out", str(poly)]) == EXIT_OK
        body = json.loads(poly.read_text())["domain"]
        assert body["bounded"] and body["reduced_dim"] == 2
        assert body["chebyshev_radius"] == pytest.approx(np.log(3) / 3, rel=1e-9)
        labels = body["basis"]["coordinates"]
        sl = tmp_path / "s.csv"
        assert main(["slice", str(poly), "--plane", "1,2", "--out", str(sl)]) == EXIT_OK
        lines = sl.read_text().splitlines()
        assert lines[0].startswith("# manifest: ")
        rows = list(csv.reader(lines[1:]))
        assert rows[0] == labels
        pts = np.array([[float(v) for v in r] for r in rows[1:]])
        a = np.array([h["coeffs"] for h in body["halfspaces"]])
        b = np.array([h["bound"] for h in body["halfspaces"]])
        assert len(pts) >= 3 and np.all(a @ pts.T <= b[:, None] + 1e-8)
        again = tmp_path / "s2.csv"
        main(["slice", str(poly), "--plane", ";".join(labels), "--out", str(again)])
        assert again.read_bytes() == sl.read_bytes()

    def test_domain_needs_normalized(self, capsys):
        assert main(["domain", str(fixture_path("worked_example_upper"))]) == EXIT_ERROR
        assert "normalize-rep" in capsys.readouterr().err

    def test_slice_bad_plane(self, tmp_path, capsys):
        poly = tmp_path / "d.json"
        main(["domain", str(fixture_path("worked_example")), "--max-len", "2", "--out", str(poly)])
        assert main(["slice", str(poly), "--plane", "1"]) == EXIT_ERROR

    def test_converge(self, tmp_path):
        out = tmp_path / "conv.json"
        assert main(["converge", str(fixture_path("worked_example")), "--min-len", "2", "--max-len", "4",
                     "--out", str(out)]) == EXIT_OK
        rows = json.loads(out.read_text())["convergence"]["rows"]
        assert [r["L"] for r in rows] == [2, 3, 4]

    def test_normalize_rep_roundtrip(self, tmp_path):
        src = fixture_path("worked_example_upper")
        out = tmp_path / "n.json"
        assert main(["normalize-rep", str(src), "--out", str(out)]) == EXIT_OK
        doc = json.loads(out.read_text())
        zeta = rep_from_json(doc)
        assert zeta.structure == "block_normalized"
        original = load_rep(src)[0].block_diagonalization()
        delta = doc["deformation"]["delta"]
        phi = {k: np.array(v) for k, v in doc["deformation"]["phi"].items()}
        for g, img in zip(zeta.group.generators(), original.images):
            assert np.allclose(beta_eval(delta, phi, zeta, g), img, atol=1e-9)
        assert main(["validate", str(out)]) == EXIT_OK

    def test_normalize_scaled_rep(self, tmp_path):
        doc = worked_doc()
        doc["structure"] = "block_diagonal"
        doc["images"]["a"] = [["6", "0", "0"], ["0", "2/3", "0"], ["0", "0", "5"]]
        src = write(tmp_path, "scaled.json", doc)
        out = tmp_path / "n.json"
        assert main(["normalize-rep", src, "--out", str(out)]) == EXIT_OK
        res = json.loads(out.read_text())
        x = np.array(res["deformation"]["phi"]["a"])
        assert abs(np.dot([2, 1], x)) < 1e-12
        assert isinstance(rep_from_json(res), RepSpec)


def test_console_script_version():
    proc = subprocess.run([sys.executable, "-m", "reducible_anosov.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "reducible-anosov" in proc.stdout
