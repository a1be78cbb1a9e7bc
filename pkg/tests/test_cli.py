import csv
import json

import numpy as np
import pytest
from PIL import Image

from helpers import duplicate_classes, total_miss_images, write_tree
from quadpattern.benchmark import BenchmarkConfig, leave_one_out, run_benchmark
from quadpattern.cli import main
from quadpattern.dataset import extract_all, load_cache, scan_dataset
from quadpattern.synthetic import write_dataset


@pytest.fixture
def dup_tree(tmp_path):
    images, labels = duplicate_classes(np.random.default_rng(3), 4, 5, shape=(20, 20))
    return write_tree(tmp_path / "dups", images, labels)


class TestExtract:
    def test_writes_cache(self, tmp_path, dup_tree, capsys):
        out = tmp_path / "faces.qpfc"
        assert main(["extract", "--descriptor", "csqp", "--dataset", str(dup_tree), "--out", str(out)]) == 0
        assert len(load_cache(out)) == 20
        assert "encoded: 20" in capsys.readouterr().out

    def test_unknown_descriptor_is_usage_error(self, tmp_path, dup_tree):
        with pytest.raises(SystemExit) as exc:
            main(["extract", "--descriptor", "sift", "--dataset", str(dup_tree), "--out", str(tmp_path / "x")])
        assert exc.value.code == 2

    def test_unreadable_dataset(self, tmp_path, capsys):
        missing = tmp_path / "gone"
        assert main(["extract", "--dataset", str(missing), "--out", str(tmp_path / "x")]) == 1
        assert str(missing) in capsys.readouterr().err

    def test_skip_report(self, tmp_path, dup_tree):
        (dup_tree / "class_00" / "bad.png").write_bytes(b"zz")
        report = tmp_path / "skips.json"
        main(["extract", "--dataset", str(dup_tree), "--out", str(tmp_path / "c"), "--skip-report", str(report)])
        skipped = json.loads(report.read_text())
        assert [s["id"] for s in skipped] == ["class_00/bad.png"]


class TestBenchmark:
    def run(self, tree, out, *extra):
        return main(["benchmark", "--dataset", str(tree), "--out-dir", str(out), *extra])

    def test_near_duplicates_perfect(self, tmp_path, dup_tree):
        assert self.run(dup_tree, tmp_path / "r") == 0
        rec = json.loads((tmp_path / "r" / "recognition.json").read_text())
        assert rec["recognition_rate"] == 100.0
        assert rec["anmrr"] == 0.0
        assert rec["config"]["normalization"] == "l1"
        assert rec["config"]["anmrr_k_rule"] == "max_class"
        assert rec["config"]["csltp_threshold"] == 5
        rows = list(csv.DictReader((tmp_path / "r" / "retrieval.csv").open()))
        assert list(rows[0]) == ["rank", "arp", "arr", "fscore"]
        assert float(rows[3]["arp"]) == 1.0 and float(rows[3]["arr"]) == 1.0
        summary = (tmp_path / "r" / "summary.txt").read_text()
        for key in ("descriptor: csqp", "normalization: l1", "anmrr_k_rule: max_class", "csltp_threshold: 5"):
            assert key in summary

    def test_adversarial_labels_zero(self, tmp_path):
        images, labels = total_miss_images(np.random.default_rng(5))
        tree = write_tree(tmp_path / "miss", images, labels)
        assert self.run(tree, tmp_path / "r") == 0
        rec = json.loads((tmp_path / "r" / "recognition.json").read_text())
        assert rec["recognition_rate"] == 0.0
        assert rec["anmrr"] == 1.0

    def test_cache_reused(self, tmp_path, dup_tree):
        cache = tmp_path / "c.qpfc"
        self.run(dup_tree, tmp_path / "r1", "--cache", str(cache))
        stamp = cache.stat().st_mtime_ns
        self.run(dup_tree, tmp_path / "r2", "--cache", str(cache))
        assert cache.stat().st_mtime_ns == stamp
        assert main(["benchmark", "--cache", str(cache), "--out-dir", str(tmp_path / "r3")]) == 0

    def test_stale_cache_fails(self, tmp_path, dup_tree, capsys):
        cache = tmp_path / "c.qpfc"
        self.run(dup_tree, tmp_path / "r1", "--cache", str(cache))
        Image.fromarray(np.zeros((20, 20), np.uint8)).save(dup_tree / "class_01" / "extra.png")
        assert self.run(dup_tree, tmp_path / "r2", "--cache", str(cache)) == 1
        assert "stale" in capsys.readouterr().err
        assert self.run(dup_tree, tmp_path / "r2", "--cache", str(cache), "--refresh") == 0

    def test_wrong_descriptor_cache(self, tmp_path, dup_tree):
        cache = tmp_path / "c.qpfc"
        self.run(dup_tree, tmp_path / "r1", "--cache", str(cache), "--descriptor", "cslbp")
        assert self.run(dup_tree, tmp_path / "r2", "--cache", str(cache)) == 1

    def test_singletons_only(self, tmp_path, capsys):
        for k in range(3):
            d = tmp_path / "solo" / f"p{k}"
            d.mkdir(parents=True)
            Image.fromarray(np.full((8, 8), k * 40, np.uint8)).save(d / "a.png")
        assert self.run(tmp_path / "solo", tmp_path / "r") == 1
        assert "no evaluable probes" in capsys.readouterr().err

    def test_needs_input(self, tmp_path):
        assert main(["benchmark", "--out-dir", str(tmp_path)]) == 2

    def test_bad_k_rule(self, tmp_path, dup_tree):
        with pytest.raises(SystemExit) as exc:
            self.run(dup_tree, tmp_path / "r", "--k-rule", "bogus")
        assert exc.value.code == 2

    def test_options_echoed(self, tmp_path, dup_tree):
        self.run(dup_tree, tmp_path / "r", "--descriptor", "csltp", "--csltp-threshold", "9",
                 "--raw", "--k-rule", "2ng", "--n-max", "3")
        rec = json.loads((tmp_path / "r" / "recognition.json").read_text())
        assert rec["config"] == {
            "anmrr_k_rule": "2ng",
            "csltp_threshold": 9,
            "dataset": str(dup_tree),
            "dataset_fingerprint": scan_dataset(dup_tree).fingerprint(),
            "descriptor": "csltp[t=9]",
            "n_max": 3,
            "normalization": "raw",
            "protocol": "leave-one-out",
        }
        assert len((tmp_path / "r" / "retrieval.csv").read_text().splitlines()) == 4


class TestAnalyze:
    def test_three_rows(self, tmp_path, dup_tree, capsys):
        assert main(["analyze", "--dataset", str(dup_tree), "--descriptors", "csqp,lbp,cslbp"]) == 0
        rows = capsys.readouterr().out.splitlines()
        assert rows[0] == "descriptor,average_entropy,images"
        assert [r.split(",")[0] for r in rows[1:]] == ["csqp", "lbp", "cslbp"]
        assert all(r.endswith(",20") for r in rows[1:])

    def test_file_output_and_marker(self, tmp_path, dup_tree):
        out = tmp_path / "e.csv"
        main(["analyze", "--dataset", str(dup_tree), "--descriptors", "csqp,ldgp", "--out", str(out)])
        assert out.read_text().splitlines()[2] == "ldgp,not-implemented,20"

    def test_unknown(self, tmp_path, dup_tree):
        assert main(["analyze", "--dataset", str(dup_tree), "--descriptors", "csqp,zzz"]) == 2


class TestExport:
    @pytest.fixture
    def image(self, tmp_path):
        p = tmp_path / "a.png"
        rgb = np.random.default_rng(0).integers(0, 256, (70, 110, 3)).astype(np.uint8)
        Image.fromarray(rgb).save(p)
        return p

    def test_feature_image_size(self, tmp_path, image):
        out = tmp_path / "a_feat.png"
        assert main(["export", "--image", str(image), "--descriptor", "csqp", "--out", str(out)]) == 0
        assert Image.open(out).size == (107, 67)

    def test_diff_prints_both_modes(self, image, capsys):
        argv = ["export", "--image", str(image), "--crop", "10,10,40,40", "--crop", "60,10,40,40", "--diff"]
        assert main(argv) == 0
        out = capsys.readouterr().out
        assert "(raw)" in out and "(normalized)" in out

    def test_crop_outside(self, image):
        argv = ["export", "--image", str(image), "--crop", "100,10,40,40", "--crop", "0,0,5,5", "--diff"]
        assert main(argv) == 1

    def test_usage(self, image):
        assert main(["export", "--image", str(image)]) == 2
        assert main(["export", "--image", str(image), "--diff", "--crop", "0,0,9,9"]) == 2
        with pytest.raises(SystemExit) as exc:
            main(["export", "--image", str(image), "--crop", "1,2,3", "--diff"])
        assert exc.value.code == 2

    def test_missing_image(self, tmp_path):
        assert main(["export", "--image", str(tmp_path / "none.png"), "--out", str(tmp_path / "o.png")]) == 1


class TestBenchmarkAPI:
    def test_leave_one_out_excludes_self(self):
        counts = np.array([[5, 1], [5, 1], [1, 5]])
        outs = leave_one_out(counts, ["a", "a", "b"], ["x", "y", "z"])
        assert [o.size for o in outs] == [2, 2, 2]
        assert outs[0].predicted_label == "a"
        assert outs[2].n_relevant == 0

    def test_jobs_do_not_change_results(self, tmp_path):
        tree = write_dataset(tmp_path / "f", n_classes=5, per_class=4, size=(24, 24))
        cache = extract_all(scan_dataset(tree))
        cfg = BenchmarkConfig()
        a = run_benchmark(cache, cfg, jobs=1)
        b = run_benchmark(cache, cfg, jobs=3)
        assert a.retrieval == b.retrieval
        assert a.recognition == b.recognition

    def test_config_validation(self):
        with pytest.raises(ValueError):
            BenchmarkConfig(n_max=0)
        with pytest.raises(ValueError):
            BenchmarkConfig(csltp_threshold=-1)
