"""Benchmark harness: configuration, workload generators, report
emission, and the command-line interface."""
