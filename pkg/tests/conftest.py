"""Shared fixtures: the 8-subject synthetic benchmark used by the
integration and acceptance tests."""

import time
from dataclasses import dataclass
from pathlib import Path

import pytest

from gaitlock import pipeline
from gaitlock.imagery import save_sequence
from gaitlock.synthgait import WalkerSpec, generate

# subjects spaced >= 15% apart in body height, period and stride
BENCH_HEIGHTS = (30, 35, 41, 48, 56, 65, 75, 87)
BENCH_PERIODS = (10, 12, 14, 17, 20, 24, 28, 33)
BENCH_STRIDES = (20, 23, 27, 32, 37, 43, 50, 58)
BENCH_WIDTHS = (9, 11, 12, 15, 17, 20, 23, 26)
BENCH_AMPLITUDES = (18, 21, 25, 29, 34, 39, 45, 52)
BENCH_FRAME_W = 272
BENCH_FRAME_H = 104
BENCH_NOISE = 0.005
BENCH_SEQUENCES = 4


def benchmark_spec(subject: int, sequence: int) -> WalkerSpec:
    return WalkerSpec(
        body_height=BENCH_HEIGHTS[subject],
        body_width=BENCH_WIDTHS[subject],
        period_frames=BENCH_PERIODS[subject],
        stride_px=BENCH_STRIDES[subject],
        leg_swing_amplitude=BENCH_AMPLITUDES[subject],
        start_x=36,
        noise_rate=BENCH_NOISE,
        seed=1000 * subject + sequence,
    )


@dataclass
class BenchmarkRun:
    data_dir: Path
    out_dir: Path
    config: pipeline.PipelineConfig
    result: pipeline.PipelineResult
    generate_seconds: float
    pipeline_seconds: float


@pytest.fixture(scope="session")
def benchmark_dataset(tmp_path_factory) -> tuple[Path, float]:
    root = tmp_path_factory.mktemp("benchmark") / "data"
    t0 = time.perf_counter()
    for subject in range(8):
        for sequence in range(BENCH_SEQUENCES):
            spec = benchmark_spec(subject, sequence)
            seq, _ = generate(
                spec,
                BENCH_FRAME_W,
                BENCH_FRAME_H,
                3 * spec.period_frames + 8,
                background_level=40,
            )
            save_sequence(seq, root / f"subj{subject:02d}" / f"seq{sequence}")
    return root, time.perf_counter() - t0


@pytest.fixture(scope="session")
def benchmark_run(benchmark_dataset, tmp_path_factory) -> BenchmarkRun:
    data_dir, gen_seconds = benchmark_dataset
    out_dir = tmp_path_factory.mktemp("benchmark_out")
    cfg = pipeline.PipelineConfig(data_dir=str(data_dir), out_dir=str(out_dir))
    t0 = time.perf_counter()
    result = pipeline.run_pipeline(cfg)
    return BenchmarkRun(
        data_dir=data_dir,
        out_dir=out_dir,
        config=cfg,
        result=result,
        generate_seconds=gen_seconds,
        pipeline_seconds=time.perf_counter() - t0,
    )
