//! Nonlocal Gamma functionals on the sphere (placeholder).
