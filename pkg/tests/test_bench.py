import pytest

from pabeam.errors import UsageError
from pabeam.beamcore import BeamformerSpec
from pabeam.bench import default_bench_grid, default_probe, ops_per_pixel, run_bench
from pabeam.workflows import parse_method_token


class TestOpsPerPixel:
    def test_micro_examples(self):
        assert ops_per_pixel("dmas", 128) == 8128
        assert ops_per_pixel("das", 128) == 128
        assert ops_per_pixel("nl", 128) == 128
        assert ops_per_pixel("dmas", 16) == 120


class TestMethodTokens:
    def test_parsing(self):
        assert parse_method_token("das").method == "das"
        assert parse_method_token("dmas").method == "dmas"
        spec = parse_method_token("nl:5")
        assert (spec.method, spec.p) == ("nl", 5)

    def test_rejects_bare_nl(self):
        with pytest.raises(UsageError):
            parse_method_token("nl")
        with pytest.raises(UsageError):
            parse_method_token("nl:x")


class TestRunBench:
    def test_small_run_structure(self):
        probe = default_probe()
        grid = default_bench_grid(probe, nx=32, nz=32)
        methods = [BeamformerSpec("das"), BeamformerSpec("dmas"),
                   BeamformerSpec("nl", 3)]
        results = run_bench(methods, [4, 8], grid, repeats=3, seed=1, probe=probe)
        assert len(results) == 6
        for r in results:
            assert r.median_seconds > 0
            assert r.repeats == 3
            assert r.grid_pixels == 32 * 32
            assert r.ops_per_pixel == ops_per_pixel(r.method, r.num_elements)
        by_key = {(r.method, r.num_elements): r for r in results}
        assert by_key[("dmas", 8)].ops_per_pixel == 28
        assert by_key[("nl", 8)].p == 3

    def test_op_counts_reproducible(self):
        probe = default_probe()
        grid = default_bench_grid(probe, nx=16, nz=16)
        methods = [BeamformerSpec("das")]
        a = run_bench(methods, [4], grid, 3, seed=1, probe=probe)
        b = run_bench(methods, [4], grid, 3, seed=1, probe=probe)
        assert [r.ops_per_pixel for r in a] == [r.ops_per_pixel for r in b]

    def test_preconditions(self):
        probe = default_probe()
        grid = default_bench_grid(probe, nx=16, nz=16)
        with pytest.raises(UsageError):
            run_bench([BeamformerSpec("das")], [4], grid, repeats=2, seed=1, probe=probe)
        with pytest.raises(UsageError):
            run_bench([BeamformerSpec("das")], [1], grid, repeats=3, seed=1, probe=probe)
