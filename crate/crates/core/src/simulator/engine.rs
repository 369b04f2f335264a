//! Event-ordered core of the simulator.
//!
//! One pending event per machine at a time: a failure while up, or a
//! service completion while being repaired. Suspension invalidates pending
//! failures through a per-machine generation counter rather than removing
//! them from the heap. Events at bit-identical timestamps are drained as a
//! batch (in ascending machine order) before any service start, release, or
//! resume decision, so simultaneous failures see each other.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal};

use super::stats::{batch_means_halfwidth, DEFAULT_BATCHES};
use super::{Dist, SimConfig, SimOutcome, SyncMode};
use crate::error::{Error, Result};

enum Sampler {
    Det(f64),
    Exp(Exp<f64>),
    LogNormal(LogNormal<f64>),
}

impl Sampler {
    fn new(dist: &Dist) -> Result<Self> {
        match *dist {
            Dist::Deterministic { value } => Ok(Sampler::Det(value)),
            Dist::Exponential { mean } => Exp::new(1.0 / mean)
                .map(Sampler::Exp)
                .map_err(|_| Error::DistMean(mean)),
            Dist::LogNormal { mean, cv } => {
                // Match the requested mean and coefficient of variation.
                let s2 = (1.0 + cv * cv).ln();
                let mu = mean.ln() - s2 / 2.0;
                LogNormal::new(mu, s2.sqrt())
                    .map(Sampler::LogNormal)
                    .map_err(|_| Error::DistMean(mean))
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Det(v) => *v,
            Sampler::Exp(d) => d.sample(rng),
            Sampler::LogNormal(d) => d.sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Up,
    Queued,
    InService,
    /// Repaired, parked in the post-repair buffer awaiting barrier release.
    Held,
    /// Up clock frozen; `fresh` marks a machine whose next up period starts
    /// a new tour (it was just repaired) rather than resuming a partial one.
    Suspended {
        remaining: f64,
        fresh: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    Failure,
    Completion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Event {
    time: f64,
    machine: u32,
    gen: u32,
    kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.machine.cmp(&other.machine))
            .then_with(|| self.gen.cmp(&other.gen))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Machine {
    state: State,
    /// Bumped whenever a pending failure event becomes stale.
    gen: u32,
    fail_at: f64,
    enqueued_at: f64,
    tour_start: f64,
    up_total: f64,
    up_segment_began: f64,
    saw_full_queue: bool,
    rng: ChaCha8Rng,
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    up: u32,
    queued: u32,
    in_service: u32,
    held: u32,
    suspended: u32,
}

impl Counts {
    fn total(&self) -> u32 {
        self.up + self.queued + self.in_service + self.held + self.suspended
    }
}

pub(super) struct Engine {
    config: SimConfig,
    service: Sampler,
    uptime: Sampler,
    time: f64,
    machines: Vec<Machine>,
    queue: VecDeque<u32>,
    in_service: Option<u32>,
    heap: BinaryHeap<std::cmp::Reverse<Event>>,
    counts: Counts,
    completions: u64,
    events_seen: u64,
    event_budget: u64,
    // Completion-count checkpoints at which timestamps are recorded: the
    // batch boundaries plus the end of the measurement window.
    targets: Vec<u64>,
    checkpoint_times: Vec<f64>,
    next_target: usize,
    batch_count: u64,
    batch_tours: u64,
    residence_sum: f64,
    serial_sum: f64,
    full_queue_tours: u64,
}

impl Engine {
    pub(super) fn new(config: &SimConfig) -> Engine {
        let tours = config.cycles - config.warmup;
        let batch_count = tours.min(DEFAULT_BATCHES);
        let batch_tours = tours / batch_count;
        let mut targets: Vec<u64> = (0..=batch_count)
            .map(|j| config.warmup + j * batch_tours)
            .collect();
        if *targets.last().expect("nonempty") != config.cycles {
            targets.push(config.cycles);
        }
        let checkpoint_times = vec![0.0; targets.len()];

        let machines = (0..config.p)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(u64::from(i));
                Machine {
                    state: State::Up,
                    gen: 0,
                    fail_at: 0.0,
                    enqueued_at: 0.0,
                    tour_start: 0.0,
                    up_total: 0.0,
                    up_segment_began: 0.0,
                    saw_full_queue: false,
                    rng,
                }
            })
            .collect();

        Engine {
            service: Sampler::new(&config.service).expect("config validated"),
            uptime: Sampler::new(&config.uptime).expect("config validated"),
            time: 0.0,
            machines,
            queue: VecDeque::with_capacity(config.p as usize),
            in_service: None,
            heap: BinaryHeap::new(),
            counts: Counts {
                up: config.p,
                ..Counts::default()
            },
            completions: 0,
            events_seen: 0,
            event_budget: config
                .cycles
                .saturating_mul(u64::from(config.p) + 4)
                .saturating_add(4096),
            targets,
            checkpoint_times,
            next_target: 0,
            batch_count,
            batch_tours,
            residence_sum: 0.0,
            serial_sum: 0.0,
            full_queue_tours: 0,
            config: *config,
        }
    }

    pub(super) fn run(mut self) -> Result<SimOutcome> {
        if self.targets[0] == 0 {
            self.checkpoint_times[0] = 0.0;
            self.next_target = 1;
        }
        for m in 0..self.config.p {
            self.begin_tour(m);
        }

        'outer: loop {
            let Some(std::cmp::Reverse(first)) = self.heap.pop() else {
                // Unreachable with a positive machine count: someone always
                // has a pending event.
                return Err(Error::EventOverflow(self.events_seen));
            };
            self.events_seen += 1;
            if self.events_seen > self.event_budget {
                return Err(Error::EventOverflow(self.events_seen));
            }
            if self.is_stale(&first) {
                continue;
            }
            self.time = first.time;
            if self.dispatch(&first) {
                break 'outer;
            }
            // Drain every event scheduled for this exact instant before
            // making any service-start, release, or resume decision.
            while let Some(&std::cmp::Reverse(next)) = self.heap.peek() {
                if next.time.total_cmp(&self.time) != Ordering::Equal {
                    break;
                }
                self.heap.pop();
                self.events_seen += 1;
                if self.is_stale(&next) {
                    continue;
                }
                if self.dispatch(&next) {
                    break 'outer;
                }
            }

            self.after_batch();
            assert!(
                self.counts.total() == self.config.p,
                "machine conservation violated: {:?} vs p = {}",
                self.counts,
                self.config.p
            );
        }

        Ok(self.finish())
    }

    fn is_stale(&self, event: &Event) -> bool {
        match event.kind {
            EventKind::Failure => {
                let machine = &self.machines[event.machine as usize];
                event.gen != machine.gen || machine.state != State::Up
            }
            EventKind::Completion => false,
        }
    }

    /// Returns true once the final tour has completed.
    fn dispatch(&mut self, event: &Event) -> bool {
        match event.kind {
            EventKind::Failure => {
                self.on_failure(event.machine);
                false
            }
            EventKind::Completion => self.on_completion(event.machine),
        }
    }

    fn on_failure(&mut self, m: u32) {
        let t = self.time;
        let machine = &mut self.machines[m as usize];
        machine.up_total += t - machine.up_segment_began;
        machine.state = State::Queued;
        machine.enqueued_at = t;
        self.counts.up -= 1;
        self.counts.queued += 1;
        self.queue.push_back(m);
    }

    fn on_completion(&mut self, m: u32) -> bool {
        let t = self.time;
        debug_assert_eq!(self.in_service, Some(m));
        self.in_service = None;
        self.counts.in_service -= 1;

        self.completions += 1;
        while self.next_target < self.targets.len()
            && self.completions == self.targets[self.next_target]
        {
            self.checkpoint_times[self.next_target] = t;
            self.next_target += 1;
        }
        if self.completions > self.config.warmup {
            let machine = &self.machines[m as usize];
            self.residence_sum += t - machine.enqueued_at;
            self.serial_sum += (t - machine.tour_start) - machine.up_total;
            self.full_queue_tours += u64::from(machine.saw_full_queue);
        }

        match self.config.mode {
            SyncMode::Asynchronous => {
                self.counts.up += 1;
                self.begin_tour(m);
            }
            SyncMode::Barrier => {
                self.machines[m as usize].state = State::Held;
                self.counts.held += 1;
            }
            SyncMode::Intermittent => {
                // The fresh up period is drawn now but only starts ticking
                // once the repair queue drains and everyone resumes.
                let machine = &mut self.machines[m as usize];
                let remaining = self.uptime.draw(&mut machine.rng);
                machine.state = State::Suspended {
                    remaining,
                    fresh: true,
                };
                self.counts.suspended += 1;
            }
        }

        self.completions == self.config.cycles
    }

    fn after_batch(&mut self) {
        if self.in_service.is_none() && !self.queue.is_empty() {
            self.start_service();
        } else if self.config.mode == SyncMode::Intermittent
            && self.in_service.is_none()
            && self.queue.is_empty()
            && self.counts.suspended > 0
        {
            self.resume_all();
        }

        if self.config.mode == SyncMode::Barrier && self.counts.held == self.config.p {
            self.release_all();
        }

        if self.counts.queued + self.counts.in_service == self.config.p {
            for machine in &mut self.machines {
                machine.saw_full_queue = true;
            }
        }
    }

    fn start_service(&mut self) {
        let m = self.queue.pop_front().expect("queue nonempty");
        self.counts.queued -= 1;
        if self.config.mode == SyncMode::Intermittent {
            self.suspend_all_up();
        }
        self.machines[m as usize].state = State::InService;
        self.counts.in_service += 1;
        self.in_service = Some(m);

        let base = self.service.draw(&mut self.machines[m as usize].rng);
        // Service stretches with the number of machines not executing:
        // queued, in service, held, or suspended. A lone request is never
        // stretched.
        let down = f64::from(self.config.p - self.counts.up);
        let stretch = 1.0 + (down - 1.0) * self.config.state_dependence_c;
        let event = Event {
            time: self.time + base * stretch,
            machine: m,
            gen: self.machines[m as usize].gen,
            kind: EventKind::Completion,
        };
        self.heap.push(std::cmp::Reverse(event));
    }

    fn suspend_all_up(&mut self) {
        let t = self.time;
        for machine in self.machines.iter_mut() {
            if machine.state == State::Up {
                machine.up_total += t - machine.up_segment_began;
                let remaining = (machine.fail_at - t).max(0.0);
                machine.gen = machine.gen.wrapping_add(1);
                machine.state = State::Suspended {
                    remaining,
                    fresh: false,
                };
                self.counts.up -= 1;
                self.counts.suspended += 1;
            }
        }
    }

    fn resume_all(&mut self) {
        let t = self.time;
        for m in 0..self.config.p {
            let machine = &mut self.machines[m as usize];
            if let State::Suspended { remaining, fresh } = machine.state {
                if fresh {
                    machine.tour_start = t;
                    machine.up_total = 0.0;
                    machine.saw_full_queue = false;
                }
                machine.state = State::Up;
                machine.up_segment_began = t;
                machine.fail_at = t + remaining;
                machine.gen = machine.gen.wrapping_add(1);
                self.counts.suspended -= 1;
                self.counts.up += 1;
                let event = Event {
                    time: machine.fail_at,
                    machine: m,
                    gen: machine.gen,
                    kind: EventKind::Failure,
                };
                self.heap.push(std::cmp::Reverse(event));
            }
        }
    }

    fn release_all(&mut self) {
        for m in 0..self.config.p {
            debug_assert_eq!(self.machines[m as usize].state, State::Held);
            self.counts.held -= 1;
            self.counts.up += 1;
            self.begin_tour(m);
        }
    }

    fn begin_tour(&mut self, m: u32) {
        let t = self.time;
        let machine = &mut self.machines[m as usize];
        let up = self.uptime.draw(&mut machine.rng);
        machine.tour_start = t;
        machine.up_total = 0.0;
        machine.saw_full_queue = false;
        machine.state = State::Up;
        machine.up_segment_began = t;
        machine.fail_at = t + up;
        machine.gen = machine.gen.wrapping_add(1);
        let event = Event {
            time: machine.fail_at,
            machine: m,
            gen: machine.gen,
            kind: EventKind::Failure,
        };
        self.heap.push(std::cmp::Reverse(event));
    }

    fn finish(self) -> SimOutcome {
        let tours = self.config.cycles - self.config.warmup;
        let t_start = self.checkpoint_times[0];
        let t_end = *self.checkpoint_times.last().expect("nonempty");
        let x_hat = tours as f64 / (t_end - t_start);
        let boundaries = &self.checkpoint_times[..=(self.batch_count as usize)];
        SimOutcome {
            x_hat,
            r_hat: self.residence_sum / tours as f64,
            ci_halfwidth: batch_means_halfwidth(boundaries, self.batch_tours),
            analytic_reference: self.config.analytic_reference(),
            tours_used: tours,
            full_queue_fraction: self.full_queue_tours as f64 / tours as f64,
            serial_time_per_tour: self.serial_sum / tours as f64,
        }
    }
}
