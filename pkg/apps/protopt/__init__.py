"""Differential-evolution search over basematrices."""
