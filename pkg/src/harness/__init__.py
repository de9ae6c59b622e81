"""
Statistics and verification harness.

- summary.py - moments, integrated autocorrelation time, effective sample size
- verdicts.py - verdict records and sampler budgets
- verify.py - verification suites comparing exact sums and chains with limit theorems
"""
