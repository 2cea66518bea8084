use rand::Rng;

use crate::spectrum::Action;

/// Linearly decaying exploration rate with a floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub epsilon: f64,
    pub delta: f64,
    pub floor: f64,
}

impl EpsilonSchedule {
    pub const FLOOR: f64 = 0.1;

    /// Starts fully exploratory (epsilon = 1).
    pub fn new(delta: f64) -> Self {
        Self {
            epsilon: 1.0,
            delta,
            floor: Self::FLOOR,
        }
    }

    /// `epsilon = max(floor, epsilon - delta)`.
    pub fn update(&mut self) {
        self.epsilon = (self.epsilon - self.delta).max(self.floor);
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy choice over `q_values`.
pub fn select_action<R: Rng + ?Sized>(q_values: &[f64], epsilon: f64, rng: &mut R) -> Action {
    if rng.random::<f64>() < epsilon {
        Action(rng.random_range(0..q_values.len()))
    } else {
        Action(argmax(q_values))
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn greedy_picks_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = [0.1, 0.9, 0.3, 0.2, 0.0, -1.0, 0.5, 0.4, 0.8];
        assert_eq!(select_action(&q, 0.0, &mut rng), Action(1));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(select_action(&q, 0.0, &mut rng), Action(0));
    }

    #[test]
    fn full_exploration_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = [0.0, 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut counts = [0usize; 9];
        let n = 100_000;
        for _ in 0..n {
            counts[select_action(&q, 1.0, &mut rng).0] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 9.0).abs() <= 0.01);
        }
    }

    #[test]
    fn epsilon_schedule_examples() {
        let mut s = EpsilonSchedule::new(0.00045);
        s.update();
        assert!((s.epsilon - 0.99955).abs() < 1e-15);

        let mut s = EpsilonSchedule {
            epsilon: 0.1,
            ..EpsilonSchedule::new(0.00045)
        };
        s.update();
        assert_eq!(s.epsilon, 0.1);

        let mut s = EpsilonSchedule::new(0.00045);
        for _ in 0..2000 {
            s.update();
        }
        assert!((s.epsilon - 0.1).abs() < 1e-9);
    }

    proptest::proptest! {
        #[test]
        fn epsilon_stays_in_range_and_never_increases(delta in 0.0f64..0.5, steps in 0usize..200) {
            let mut s = EpsilonSchedule::new(delta);
            let mut prev = s.epsilon;
            for _ in 0..steps {
                s.update();
                proptest::prop_assert!(s.epsilon <= prev);
                proptest::prop_assert!((0.1..=1.0).contains(&s.epsilon));
                prev = s.epsilon;
            }
        }

        #[test]
        fn argmax_ignores_constant_shift(
            q in proptest::collection::vec(-10.0f64..10.0, 9),
            shift in -100.0f64..100.0,
        ) {
            // Shifting can merge near-ties through rounding; compare values.
            let shifted: Vec<f64> = q.iter().map(|v| v + shift).collect();
            let a = argmax(&q);
            let b = argmax(&shifted);
            proptest::prop_assert!(a == b || (q[a] - q[b]).abs() < 1e-9);
        }
    }
}
