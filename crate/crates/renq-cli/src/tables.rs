//! Embedded reference data: the published absolute-error tables the
//! `reproduce` command checks itself against, and the parameter grids for
//! the table and figure datasets.
//!
//! The reference tables print `exact − approx` to three significant
//! figures for each measure over a (patience rate, server count) grid.
//! Agreement is judged in units of the print precision: one print-ulp of
//! a value `v` is `10^(floor(log10 |v|) − 2)`, the weight of its last
//! printed digit, and a computed value matches when it sits within
//! 0.505 print-ulp of the printed one (half an ulp plus reading slack).

use renq::model::{Capacity, ModelParams};

/// Which measure a reference cell concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    PQ,
    PA,
    L,
}

impl Measure {
    pub fn label(self) -> &'static str {
        match self {
            Measure::PQ => "p_q",
            Measure::PA => "p_a",
            Measure::L => "l",
        }
    }
}

/// One printed reference cell: the published `exact − approx` value for a
/// measure at one grid point.
#[derive(Debug, Clone, Copy)]
pub struct PrintedCell {
    pub measure: Measure,
    /// θ₁ for the first table, θ₂ for the second.
    pub theta: f64,
    pub s: u32,
    pub printed_abs: f64,
}

/// Server counts common to both reference tables.
pub const TABLE_S: [u32; 6] = [20, 30, 40, 50, 60, 70];

/// Patience-rate values common to both reference tables.
pub const TABLE_THETA: [f64; 3] = [0.2, 2.0, 20.0];

const MEASURES: [Measure; 3] = [Measure::PQ, Measure::PA, Measure::L];

fn cells(by_measure_then_theta: &[[[f64; 6]; 3]; 3]) -> Vec<PrintedCell> {
    let mut out = Vec::with_capacity(54);
    for (mi, measure) in MEASURES.into_iter().enumerate() {
        for (ti, &theta) in TABLE_THETA.iter().enumerate() {
            for (si, &s) in TABLE_S.iter().enumerate() {
                out.push(PrintedCell {
                    measure,
                    theta,
                    s,
                    printed_abs: by_measure_then_theta[mi][ti][si],
                });
            }
        }
    }
    out
}

/// Published error table over θ₁ ∈ {0.2, 2, 20} × s ∈ {20..70} at
/// λ = 50, μ = 1, n1 = 10, n2 = 20, θ₂ = 2.
pub fn table2_printed() -> Vec<PrintedCell> {
    cells(&[
        // P_Q
        [
            [4.25e-6, 0.000383, 0.00405, -0.00786, 0.00583, 0.00176],
            [0.000496, 0.00381, -0.00111, -0.011, 0.00369, 0.0015],
            [-0.00609, -0.0182, -0.0252, -0.0155, 0.000497, 0.00092],
        ],
        // P_A
        [
            [-2.36e-7, -2.46e-5, -0.000497, 0.000106, 0.000427, 2.49e-5],
            [-3.27e-5, -0.000409, -0.00116, 7.15e-5, 0.000954, 0.000129],
            [-0.00261, -0.00302, -0.00237, 0.000128, 0.00174, 0.000362],
        ],
        // L
        [
            [-0.0654, -0.0254, 0.0273, -0.0607, 0.0455, 0.00496],
            [-0.0197, -0.0121, -0.0292, 0.00179, 0.0239, 0.00323],
            [-0.0065, -0.00755, -0.00591, 0.00032, 0.00436, 0.000905],
        ],
    ])
}

/// Published error table over θ₂ ∈ {0.2, 2, 20} × s ∈ {20..70} at
/// λ = 50, μ = 1, n1 = 5, n2 = 20, θ₁ = 2.
pub fn table3_printed() -> Vec<PrintedCell> {
    cells(&[
        // P_Q
        [
            [1.31e-5, 0.000805, -0.000664, -0.00838, 0.00437, 0.00162],
            [0.000504, 0.0038, -0.00113, -0.011, 0.00369, 0.0015],
            [0.00653, 0.0111, -0.00201, -0.0145, 0.00229, 0.00143],
        ],
        // P_A
        [
            [-7.46e-7, -6.29e-5, -0.000663, -0.000176, 0.000798, 7.92e-5],
            [-3.32e-5, -0.000409, -0.00116, 7.17e-5, 0.000954, 0.000129],
            [-0.000478, -0.00132, -0.00171, 0.000396, 0.00128, 0.000158],
        ],
        // L
        [
            [0.451, 0.284, -0.104, 0.0559, 0.0328, -0.0115],
            [-0.0681, -0.0291, -0.0309, 0.00172, 0.0239, 0.00323],
            [0.0915, 0.0298, -0.0559, -0.046, 0.00998, 0.00264],
        ],
    ])
}

/// Model at one grid point of the first reference table.
pub fn table2_params(theta1: f64, s: u32) -> ModelParams {
    ModelParams::new(
        50.0,
        1.0,
        s,
        Capacity::Finite(10),
        Capacity::Finite(20),
        theta1,
        2.0,
    )
    .expect("table grid is valid")
}

/// Model at one grid point of the second reference table.
pub fn table3_params(theta2: f64, s: u32) -> ModelParams {
    ModelParams::new(
        50.0,
        1.0,
        s,
        Capacity::Finite(5),
        Capacity::Finite(20),
        2.0,
        theta2,
    )
    .expect("table grid is valid")
}

/// Weight of the last printed digit of a three-significant-figure value.
pub fn print_ulp(printed: f64) -> f64 {
    10f64.powi(printed.abs().log10().floor() as i32 - 2)
}

/// Deviation between a computed value and its printed reference, in units
/// of the print precision.
pub fn print_deviation(computed: f64, printed: f64) -> f64 {
    (computed - printed).abs() / print_ulp(printed)
}

/// Largest deviation, in print-ulps, accepted as "matches the print".
pub const PRINT_TOLERANCE_ULPS: f64 = 0.505;

/// Figure datasets: each is a named list of grid points in emission
/// order (first axis outer, second axis inner).
pub struct FigureGrid {
    pub name: &'static str,
    pub points: Vec<ModelParams>,
}

fn grid(name: &'static str, points: Vec<ModelParams>) -> FigureGrid {
    FigureGrid { name, points }
}

/// Delay measures against server count for three first-stage patience
/// rates (λ=50, μ=1, n1=10, n2=20, θ₂=2).
pub fn fig3() -> FigureGrid {
    let mut points = Vec::new();
    for &theta1 in &TABLE_THETA {
        for s in 20..=70 {
            points.push(table2_params(theta1, s));
        }
    }
    grid("fig3", points)
}

/// Convergence as the first-stage capacity grows, for several
/// second-stage capacities (λ=50, μ=1, s=30, θ₁=2, θ₂=5).
pub fn fig4() -> FigureGrid {
    let mut points = Vec::new();
    for n2 in [0u32, 5, 10, 20] {
        for n1 in 0..=30u32 {
            points.push(
                ModelParams::new(
                    50.0,
                    1.0,
                    30,
                    Capacity::Finite(n1),
                    Capacity::Finite(n2),
                    2.0,
                    5.0,
                )
                .expect("figure grid is valid"),
            );
        }
    }
    grid("fig4", points)
}

/// Measures against server count for three second-stage patience rates
/// (λ=50, μ=1, n1=5, n2=20, θ₁=2).
pub fn fig5() -> FigureGrid {
    let mut points = Vec::new();
    for &theta2 in &TABLE_THETA {
        for s in 20..=70 {
            points.push(table3_params(theta2, s));
        }
    }
    grid("fig5", points)
}

/// Convergence as the first-stage patience rate grows, for several
/// second-stage rates (λ=50, μ=1, s=30, n1=6, n2=20).
pub fn fig6() -> FigureGrid {
    let mut points = Vec::new();
    for theta2 in [0.5, 2.0, 8.0] {
        for theta1 in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            points.push(
                ModelParams::new(
                    50.0,
                    1.0,
                    30,
                    Capacity::Finite(6),
                    Capacity::Finite(20),
                    theta1,
                    theta2,
                )
                .expect("figure grid is valid"),
            );
        }
    }
    grid("fig6", points)
}

/// Unbounded second stage: measures against the first-stage capacity for
/// several second-stage patience rates (λ=50, μ=1, s=30, θ₁=4, n2=∞).
pub fn fig7() -> FigureGrid {
    let mut points = Vec::new();
    for theta2 in [0.5, 2.0, 8.0] {
        for n1 in 0..=12u32 {
            points.push(
                ModelParams::new(
                    50.0,
                    1.0,
                    30,
                    Capacity::Finite(n1),
                    Capacity::Infinite,
                    4.0,
                    theta2,
                )
                .expect("figure grid is valid"),
            );
        }
    }
    grid("fig7", points)
}
