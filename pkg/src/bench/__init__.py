from .flops import FlopsModel, FlopsReport, flops_estimate
from .report import read_csv, report_header, write_csv
from .spectrum import CENTROID_COLUMNS, SPECTRUM_COLUMNS, SpectrumReport, spectrum_report
from .sweep import DEFAULT_RATIOS, SWEEP_COLUMNS, SweepRow, markdown_table, retention_sweep
from .timing import BENCH_COLUMNS, MIN_REPEATS, BenchResult, bench_forward, time_forward
