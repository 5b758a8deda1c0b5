"""
Core functionality: geometry, detectors, matching, solver, scene generation and the run harness
"""
