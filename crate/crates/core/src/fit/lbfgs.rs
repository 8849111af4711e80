//! Projected quasi-Newton minimizer for box-constrained smooth objectives.
//!
//! Limited-memory BFGS with gradient projection: directions come from the
//! two-loop recursion on the projected gradient, steps walk the projected
//! arc with backtracking, and the pair memory is dropped whenever the
//! active set changes. Strict descent is enforced on every accepted step,
//! which is exactly what the outer fitting loop's monotonicity argument
//! needs.

use std::collections::VecDeque;

use nalgebra::DVector;

const MEMORY: usize = 8;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

pub(crate) struct BoxBounds {
    lo: DVector<f64>,
    hi: DVector<f64>,
}

impl BoxBounds {
    /// `[-h_j, +h_j]` per coordinate; a zero half-width pins the coordinate.
    pub fn symmetric(half_widths: &[f64]) -> Self {
        let hi = DVector::from_iterator(half_widths.len(), half_widths.iter().map(|h| h.max(0.0)));
        BoxBounds { lo: -&hi, hi }
    }

    pub fn project(&self, x: &mut DVector<f64>) {
        for j in 0..x.len() {
            x[j] = x[j].clamp(self.lo[j], self.hi[j]);
        }
    }

    fn active_set(&self, x: &DVector<f64>) -> Vec<i8> {
        (0..x.len())
            .map(|j| {
                if x[j] <= self.lo[j] {
                    -1
                } else if x[j] >= self.hi[j] {
                    1
                } else {
                    0
                }
            })
            .collect()
    }

    /// Gradient with components pointing out of the box zeroed.
    fn projected_gradient(&self, x: &DVector<f64>, g: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            x.len(),
            (0..x.len()).map(|j| {
                if (x[j] <= self.lo[j] && g[j] > 0.0) || (x[j] >= self.hi[j] && g[j] < 0.0) {
                    0.0
                } else {
                    g[j]
                }
            }),
        )
    }
}

pub(crate) struct Minimum {
    pub x: DVector<f64>,
    // Diagnostics; only the unit tests read them today.
    #[allow(dead_code)]
    pub value: f64,
    #[allow(dead_code)]
    pub iterations: usize,
    pub evaluations: u64,
}

fn two_loop(
    history: &VecDeque<(DVector<f64>, DVector<f64>, f64)>,
    g: &DVector<f64>,
) -> DVector<f64> {
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * s.dot(&q);
        q.axpy(-a, y, 1.0);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let yy = y.dot(y);
        if yy > 0.0 {
            q *= s.dot(y) / yy;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * y.dot(&q);
        q.axpy(a - b, s, 1.0);
    }
    q
}

/// Minimize `eval` (value and gradient) over the box. Deterministic; every
/// accepted step strictly decreases the objective.
pub(crate) fn minimize_box<F>(
    mut x: DVector<f64>,
    bounds: &BoxBounds,
    max_iterations: usize,
    gradient_tolerance: f64,
    mut eval: F,
) -> Minimum
where
    F: FnMut(&DVector<f64>) -> (f64, DVector<f64>),
{
    bounds.project(&mut x);
    let (mut f, mut g) = eval(&x);
    let mut evaluations = 1u64;
    let mut history: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();
    let mut active = bounds.active_set(&x);

    let mut iterations = 0;
    while iterations < max_iterations {
        let pg = bounds.projected_gradient(&x, &g);
        if pg.amax() <= gradient_tolerance {
            break;
        }
        iterations += 1;

        let mut d = -two_loop(&history, &pg);
        if !d.iter().all(|v| v.is_finite()) || d.dot(&g) >= 0.0 {
            history.clear();
            d = -&pg;
        }

        let mut accepted = None;
        let mut alpha = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            let mut x_new = &x + &d * alpha;
            bounds.project(&mut x_new);
            let step = &x_new - &x;
            if step.amax() == 0.0 {
                break;
            }
            let (f_new, g_new) = eval(&x_new);
            evaluations += 1;
            let slope = g.dot(&step);
            if f_new < f && f_new <= f + ARMIJO * slope.min(0.0) {
                accepted = Some((x_new, f_new, g_new, step));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new, g_new, step)) = accepted else {
            break;
        };

        let y = &g_new - &g;
        let sy = step.dot(&y);
        if sy > 1e-12 * step.norm() * y.norm() {
            if history.len() == MEMORY {
                history.pop_front();
            }
            history.push_back((step, y, 1.0 / sy));
        }
        x = x_new;
        f = f_new;
        g = g_new;
        let new_active = bounds.active_set(&x);
        if new_active != active {
            history.clear();
            active = new_active;
        }
    }

    Minimum {
        x,
        value: f,
        iterations,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable_quadratic<'a>(
        weights: &'a [f64],
        targets: &'a [f64],
    ) -> impl FnMut(&DVector<f64>) -> (f64, DVector<f64>) + 'a {
        move |x: &DVector<f64>| {
            let mut f = 0.0;
            let mut g = DVector::zeros(x.len());
            for j in 0..x.len() {
                let d = x[j] - targets[j];
                f += weights[j] * d * d;
                g[j] = 2.0 * weights[j] * d;
            }
            (f, g)
        }
    }

    #[test]
    fn unconstrained_quadratic_reaches_target() {
        let weights = [1.0, 10.0, 0.3, 2.5];
        let targets = [0.4, -0.2, 0.05, -0.6];
        let bounds = BoxBounds::symmetric(&[10.0; 4]);
        let m = minimize_box(
            DVector::zeros(4),
            &bounds,
            100,
            1e-12,
            separable_quadratic(&weights, &targets),
        );
        for (j, target) in targets.iter().enumerate() {
            assert!((m.x[j] - target).abs() < 1e-8, "coordinate {j}");
        }
        assert!(m.value < 1e-14);
    }

    #[test]
    fn solution_clamps_to_box_faces() {
        // Separable, so the constrained optimum is the clipped target.
        let weights = [2.0, 1.0, 4.0];
        let targets = [3.0, -0.1, -7.0];
        let half = [1.0, 0.5, 2.0];
        let bounds = BoxBounds::symmetric(&half);
        let m = minimize_box(
            DVector::zeros(3),
            &bounds,
            200,
            1e-12,
            separable_quadratic(&weights, &targets),
        );
        let expect = [1.0, -0.1, -2.0];
        for (j, e) in expect.iter().enumerate() {
            assert!((m.x[j] - e).abs() < 1e-8, "coordinate {j}");
        }
    }

    #[test]
    fn zero_width_coordinate_stays_pinned() {
        let weights = [1.0, 1.0];
        let targets = [5.0, 0.7];
        let bounds = BoxBounds::symmetric(&[0.0, 2.0]);
        let m = minimize_box(
            DVector::from_vec(vec![0.9, 0.0]),
            &bounds,
            100,
            1e-12,
            separable_quadratic(&weights, &targets),
        );
        assert_eq!(m.x[0], 0.0);
        assert!((m.x[1] - 0.7).abs() < 1e-8);
    }

    #[test]
    fn coupled_ill_conditioned_quadratic_converges() {
        // f(x) = 0.5 x^T H x - b^T x with H from a fixed SPD construction;
        // the unconstrained optimum solves H x = b.
        let n = 12;
        let mut h = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] = 1.0 / ((i + j + 1) as f64) + if i == j { 1e-3 } else { 0.0 };
            }
        }
        let b = DVector::from_fn(n, |i, _| ((i as f64) * 0.37).sin() * 1e-2);
        let solution = h.clone().lu().solve(&b).unwrap();
        assert!(solution.amax() < 10.0, "optimum must lie inside the box");

        let bounds = BoxBounds::symmetric(&vec![10.0; n]);
        let m = minimize_box(DVector::zeros(n), &bounds, 500, 1e-13, |x| {
            let hx = &h * x;
            ((0.5 * x.dot(&hx) - b.dot(x)), hx - &b)
        });
        assert!(
            (&m.x - &solution).amax() < 1e-6,
            "max deviation {}",
            (&m.x - &solution).amax()
        );
    }

    #[test]
    fn returned_value_improves_on_start_and_counts_evaluations() {
        let weights = [1.0, 3.0];
        let targets = [1.0, -1.0];
        let mut values = Vec::new();
        let bounds = BoxBounds::symmetric(&[0.8, 0.8]);
        let mut inner = separable_quadratic(&weights, &targets);
        let m = minimize_box(DVector::zeros(2), &bounds, 50, 1e-12, |x| {
            let r = inner(x);
            values.push(r.0);
            r
        });
        assert!(m.value < values[0]);
        assert_eq!(m.evaluations, values.len() as u64);
        // Constrained optimum of this separable problem: clip(target, box).
        assert!((m.x[0] - 0.8).abs() < 1e-8);
        assert!((m.x[1] + 0.8).abs() < 1e-8);
    }
}
