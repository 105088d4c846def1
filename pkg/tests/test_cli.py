"""Command-line behavior: wiring, output text, and exit codes."""

import numpy as np
import pytest

from clft.cli import main
from clft.fixtures import default_calibration
from clft.io_formats import (
    load_mask,
    load_raster,
    save_calibration,
    save_checkpoint,
    save_image,
    save_mask,
    save_point_cloud,
)


def test_no_command_is_a_usage_error(capsys):
    assert main([]) == 1
    err = capsys.readouterr().err
    assert "usage:" in err and "a command is required" in err


def test_unknown_command(capsys):
    assert main(["segment"]) == 1
    assert "invalid choice" in capsys.readouterr().err


def test_unknown_flag(capsys):
    assert main(["gradcheck", "--fast"]) == 1
    assert "unrecognized arguments" in capsys.readouterr().err


def test_bad_variant_choice(capsys):
    assert main(["init", "--config", "tiny", "--out", "x.ckpt"]) == 1
    assert "invalid choice" in capsys.readouterr().err


def test_missing_required_flag(capsys):
    assert main(["project", "--cloud", "a", "--calib", "b"]) == 1
    assert "--out" in capsys.readouterr().err


class TestGradcheck:
    def test_all_ops_pass(self, capsys):
        assert main(["gradcheck"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 5
        assert [l.split()[0] for l in lines] == ["linear", "softmax", "gelu", "layer_norm", "sdpa"]
        assert all(l.endswith("pass") for l in lines)

    def test_zero_tolerance_fails_with_exit_3(self, capsys):
        assert main(["gradcheck", "--tolerance", "0"]) == 3
        assert "FAIL" in capsys.readouterr().out


class TestMakeFixtures:
    def test_writes_paired_frames(self, tmp_path, capsys):
        out = tmp_path / "data"
        assert main(["make-fixtures", "--out", str(out), "--seed", "3", "--count", "2"]) == 0
        assert "wrote 2 frames" in capsys.readouterr().out
        assert (out / "calib.json").is_file()
        for stem in ("frame_00", "frame_01"):
            assert (out / "camera" / f"{stem}.ppm").is_file()
            assert (out / "cloud" / f"{stem}.clpc").is_file()
            labels = set(np.unique(load_mask(out / "gt" / f"{stem}.pgm")).tolist())
            assert labels <= {0, 1, 2, 3, 4, 255}
            assert 0 in labels and 255 in labels


class TestProject:
    def _calib_file(self, tmp_path):
        path = tmp_path / "calib.json"
        save_calibration(path, default_calibration(64, 64))
        return path

    def test_projects_fixture_cloud(self, tmp_path, capsys):
        out = tmp_path / "data"
        main(["make-fixtures", "--out", str(out), "--seed", "1", "--count", "1"])
        capsys.readouterr()
        raster_path = tmp_path / "frame_00.raster"
        code = main(
            [
                "project",
                "--cloud", str(out / "cloud" / "frame_00.clpc"),
                "--calib", str(out / "calib.json"),
                "--out", str(raster_path),
            ]
        )
        assert code == 0
        msg = capsys.readouterr().out
        assert "points" in msg and "pixels hit" in msg
        raster = load_raster(raster_path)
        assert raster.shape == (3, 384, 384)
        assert np.count_nonzero(raster[2] > 0) > 100

    def test_empty_cloud_gives_zero_raster(self, tmp_path, capsys):
        cloud = tmp_path / "empty.clpc"
        save_point_cloud(cloud, np.zeros((0, 3), np.float32))
        out = tmp_path / "out.raster"
        args = ["project", "--cloud", str(cloud), "--calib", str(self._calib_file(tmp_path))]
        assert main(args + ["--height", "16", "--width", "8", "--out", str(out)]) == 0
        assert "0 pixels hit" in capsys.readouterr().out
        raster = load_raster(out)
        assert raster.shape == (3, 16, 8) and not raster.any()

    def test_missing_cloud_file(self, tmp_path, capsys):
        args = ["project", "--cloud", str(tmp_path / "nope.clpc"),
                "--calib", str(self._calib_file(tmp_path)), "--out", str(tmp_path / "o")]
        assert main(args) == 2
        assert "error:" in capsys.readouterr().err

    def test_malformed_calibration(self, tmp_path, capsys):
        cloud = tmp_path / "c.clpc"
        save_point_cloud(cloud, np.ones((1, 3), np.float32))
        calib = tmp_path / "calib.json"
        calib.write_text("{broken")
        args = ["project", "--cloud", str(cloud), "--calib", str(calib), "--out", str(tmp_path / "o")]
        assert main(args) == 2


class TestEval:
    def _write_pair(self, tmp_path):
        gt = np.zeros((10, 10), np.uint8)
        for label in range(5):
            gt[2 * label : 2 * label + 2] = label
        gt[:, 9] = 255
        pred = gt.copy()
        pred[gt == 255] = 0
        (tmp_path / "gt").mkdir()
        (tmp_path / "pred").mkdir()
        save_mask(tmp_path / "gt" / "a.pgm", gt)
        save_mask(tmp_path / "pred" / "a.pgm", pred)
        return str(tmp_path / "pred"), str(tmp_path / "gt")

    def test_perfect_prediction_scores_one(self, tmp_path, capsys):
        pred, gt = self._write_pair(tmp_path)
        assert main(["eval", "--pred-dir", pred, "--gt-dir", gt]) == 0
        out = capsys.readouterr().out
        for name in ("background", "vehicle", "pedestrian", "cyclist", "sign"):
            assert name in out
        assert out.count("1.0000") == 16  # 5 classes x 3 ratios + mean row

    def test_tsv_format(self, tmp_path, capsys):
        pred, gt = self._write_pair(tmp_path)
        assert main(["eval", "--pred-dir", pred, "--gt-dir", gt, "--format", "tsv"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "class\tiou\tprecision\trecall"
        assert "vehicle\t1.0000\t1.0000\t1.0000" in lines

    def test_mismatched_directories(self, tmp_path, capsys):
        pred, gt = self._write_pair(tmp_path)
        save_mask(tmp_path / "pred" / "b.pgm", np.zeros((4, 4), np.uint8))
        assert main(["eval", "--pred-dir", pred, "--gt-dir", gt]) == 2

    def test_empty_class_name(self, tmp_path, capsys):
        pred, gt = self._write_pair(tmp_path)
        assert main(["eval", "--pred-dir", pred, "--gt-dir", gt, "--classes", "a,,b"]) == 2
        assert "empty class name" in capsys.readouterr().err

    def test_prediction_label_out_of_range(self, tmp_path, capsys):
        pred, gt = self._write_pair(tmp_path)
        assert main(["eval", "--pred-dir", pred, "--gt-dir", gt, "--classes", "road,car"]) == 2


class TestInfer:
    def _image(self, tmp_path):
        path = tmp_path / "frame.ppm"
        save_image(path, np.full((3, 32, 32), 0.5, np.float32))
        return str(path)

    def test_fusion_without_camera_is_usage_error(self, tmp_path, capsys):
        code = main(
            [
                "infer",
                "--checkpoint", str(tmp_path / "absent.ckpt"),
                "--config", "base",
                "--mode", "fusion",
                "--lidar", str(tmp_path / "absent.raster"),
                "--out", str(tmp_path / "m.pgm"),
            ]
        )
        # the modality check fires before any file is touched
        assert code == 1
        assert "requires --camera" in capsys.readouterr().err

    def test_lidar_mode_without_lidar(self, tmp_path, capsys):
        code = main(
            [
                "infer",
                "--checkpoint", str(tmp_path / "absent.ckpt"),
                "--config", "base",
                "--mode", "lidar",
                "--out", str(tmp_path / "m.pgm"),
            ]
        )
        assert code == 1
        assert "requires --lidar" in capsys.readouterr().err

    def test_missing_checkpoint_file(self, tmp_path, capsys):
        code = main(
            [
                "infer",
                "--checkpoint", str(tmp_path / "absent.ckpt"),
                "--config", "base",
                "--mode", "camera",
                "--camera", self._image(tmp_path),
                "--out", str(tmp_path / "m.pgm"),
            ]
        )
        assert code == 2

    def test_mismatched_checkpoint_content(self, tmp_path, capsys):
        ckpt = tmp_path / "wrong.ckpt"
        save_checkpoint(ckpt, {"w": np.ones((2, 2), np.float32)})
        code = main(
            [
                "infer",
                "--checkpoint", str(ckpt),
                "--config", "base",
                "--mode", "camera",
                "--camera", self._image(tmp_path),
                "--out", str(tmp_path / "m.pgm"),
            ]
        )
        assert code == 2
        assert "missing" in capsys.readouterr().err
