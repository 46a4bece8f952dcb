//! Learning-rate schedules: warmup-stable-decay with a 1-sqrt cooldown, and
//! warmup-cosine for the ablation-style runs.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Wsd,
    Cosine,
}

impl ScheduleKind {
    pub fn parse(s: &str) -> Option<ScheduleKind> {
        match s {
            "wsd" => Some(ScheduleKind::Wsd),
            "cosine" => Some(ScheduleKind::Cosine),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Wsd => "wsd",
            ScheduleKind::Cosine => "cosine",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    pub kind: ScheduleKind,
    pub max_lr: f64,
    pub min_lr: f64,
    pub warmup_steps: u64,
    pub constant_steps: u64,
    pub cooldown_steps: u64,
}

impl LrSchedule {
    pub fn total_steps(&self) -> u64 {
        self.warmup_steps + self.constant_steps + self.cooldown_steps
    }

    /// Learning rate at a step. Phases: linear warmup from zero, a constant
    /// plateau at `max_lr`, then a cooldown. The 1-sqrt cooldown reads
    /// lr(tau) = max_lr (1 - sqrt(tau)) + min_lr sqrt(tau); cosine is the
    /// usual half-wave. Steps past the schedule clamp to the final value.
    pub fn lr_at(&self, step: u64) -> f64 {
        if step < self.warmup_steps {
            return self.max_lr * step as f64 / self.warmup_steps as f64;
        }
        let after_warmup = step - self.warmup_steps;
        if after_warmup < self.constant_steps {
            return self.max_lr;
        }
        let into_cooldown = after_warmup - self.constant_steps;
        if into_cooldown >= self.cooldown_steps {
            return self.min_lr;
        }
        let tau = into_cooldown as f64 / self.cooldown_steps as f64;
        match self.kind {
            ScheduleKind::Wsd => {
                let s = tau.sqrt();
                self.max_lr * (1.0 - s) + self.min_lr * s
            }
            ScheduleKind::Cosine => {
                self.min_lr
                    + 0.5 * (self.max_lr - self.min_lr) * (1.0 + (std::f64::consts::PI * tau).cos())
            }
        }
    }
}
