"""
Glauber dynamics for the edge-triangle Gibbs measure.

- graph.py - bit-set graph state, common neighbours, heat-bath update, recount oracle
- chain.py - chain configuration, seeded streams, sweeps and density traces
"""
