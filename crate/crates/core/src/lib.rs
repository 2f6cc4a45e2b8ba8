//! Frames, classification and numerics for second-order systems
//! `u_xt = F(u, ux, v, vx)`, `v_xt = G(u, ux, v, vx)` that describe
//! surfaces of constant Gaussian curvature.

pub mod expr;
pub mod config;
pub mod frames;
pub mod classify;
pub mod catalog;
pub mod linear;
pub mod goursat;
