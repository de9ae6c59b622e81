"""
Edge-Triangle Laboratory - Source Package

A numerical laboratory for the edge-triangle exponential random graph model,
organised by domain:

Domain Organization:
- core/        - Shared infrastructure (settings, logging, exceptions)
- phase/       - Scalar variational problem: stationary points, phases, critical curve
- meanfield/   - Exact finite-n sums for the mean-field model
- enumeration/ - Brute-force enumeration of the true model for small n
- sampler/     - Single-edge Glauber dynamics with incremental triangle counts
- harness/     - Trace statistics and limit-theorem verdicts
- export/      - CSV/JSON writers with embedded run metadata
- cli/         - Command-line entry point

Educational Value:
Each domain can be studied independently: the phase solver is pure calculus
on [0, 1], the exact sums are log-space bookkeeping over a lattice, and the
sampler is a plain Markov chain. The harness shows how asymptotic statements
turn into finite-size checks with explicit tolerances.
"""

__version__ = "0.1.0"
