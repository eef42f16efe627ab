import json

import pytest

from sisa_detect.cli import main
from sisa_detect.document import validate_document


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCli:
    def test_stdout_document(self, capsys, data_dir):
        code, out, _ = run_cli(capsys, str(data_dir / "portrait.png"), "--backend", "face")
        assert code == 0
        doc = json.loads(out)
        validate_document(doc)
        assert doc["image"] == {"width": 512, "height": 512}
        assert any(r["kind"] == "face" for r in doc["regions"])

    def test_out_file(self, capsys, data_dir, tmp_path):
        out_path = tmp_path / "doc.json"
        code, out, err = run_cli(
            capsys, str(data_dir / "blank.png"), "--backend", "face",
            "--out", str(out_path),
        )
        assert code == 0
        assert out == ""
        doc = json.loads(out_path.read_text())
        validate_document(doc)
        assert doc["regions"] == []

    def test_min_confidence_filters(self, capsys, data_dir):
        code, out, _ = run_cli(
            capsys, str(data_dir / "two_people.png"), "--backend", "face",
            "--min-confidence", "0.9",
        )
        assert code == 0
        doc = json.loads(out)
        assert len(doc["regions"]) == 2
        assert all(r["confidence"] > 0.9 for r in doc["regions"])

    def test_missing_image_exit2(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, str(tmp_path / "absent.png"))
        assert code == 2
        assert "error" in err

    def test_maskrcnn_unavailable_exit4(self, capsys, data_dir, monkeypatch, tmp_path):
        monkeypatch.delenv("SISA_DETECT_WEIGHTS", raising=False)
        monkeypatch.setenv("TORCH_HOME", str(tmp_path))
        code, _, err = run_cli(
            capsys, str(data_dir / "portrait.png"), "--backend", "maskrcnn"
        )
        assert code == 4
        assert "download.pytorch.org" in err

    def test_auto_falls_back_to_faces(self, capsys, data_dir, monkeypatch, tmp_path):
        monkeypatch.delenv("SISA_DETECT_WEIGHTS", raising=False)
        monkeypatch.setenv("TORCH_HOME", str(tmp_path))
        code, out, err = run_cli(capsys, str(data_dir / "portrait.png"))
        assert code == 0
        assert "falling back" in err
        doc = json.loads(out)
        assert any(r["kind"] == "face" for r in doc["regions"])

    def test_gallery_identity(self, capsys, data_dir):
        code, out, _ = run_cli(
            capsys, str(data_dir / "portrait.png"), "--backend", "face",
            "--gallery", str(data_dir / "gallery"),
        )
        assert code == 0
        doc = json.loads(out)
        named = [r for r in doc["regions"] if r.get("identity")]
        assert [r["identity"] for r in named] == ["eileen"]

    def test_empty_gallery_warns(self, capsys, data_dir, tmp_path):
        code, out, err = run_cli(
            capsys, str(data_dir / "portrait.png"), "--backend", "face",
            "--gallery", str(tmp_path),
        )
        assert code == 0
        assert "empty" in err
        doc = json.loads(out)
        assert all("identity" not in r for r in doc["regions"])

    def test_enable_text(self, capsys, data_dir):
        code, out, _ = run_cli(
            capsys, str(data_dir / "page.png"), "--backend", "face", "--enable-text",
        )
        assert code == 0
        doc = json.loads(out)
        validate_document(doc)
        text_regions = [r for r in doc["regions"] if r["kind"] == "text"]
        assert text_regions, "expected text lines on the page sample"
