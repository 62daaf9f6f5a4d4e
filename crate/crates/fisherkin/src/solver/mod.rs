//! Kinetic flows (placeholder).
