//! Two agents in one world: composed loops, per-agent outer worlds, and
//! shared distinctions.
//!
//! Both agents act on a single world through one update kernel
//! `alpha: A1 x A2 x W -> W`; everything else (sensing, agent state, policy)
//! is per-agent. From agent `i`'s perspective the outer world is the product
//! of the common world with the *other* agent's sensor, state, and actuator
//! coordinates — the partner is just more world. Deriving that view yields an
//! ordinary [`LoopModel`] to which every single-agent analysis applies.
//!
//! Distinctions two agents can share must live in the common world: each
//! agent's partition is lifted to the full joint state space as a cylinder
//! partition, and their meet is intersected against cylinders over `W`.

use crate::error::ModelError;
use crate::kernel::Kernel;
use crate::model::LoopModel;
use crate::partition::Partition;
use crate::refinement::{sigma_beta, w_sep};
use crate::intrinsic::intrinsic_partition;
use crate::scalar::Scalar;
use crate::space::{product_space, ProductIndexer, SpaceRef};

/// Default cap on derived product-space sizes; overridable per call (the CLI
/// wires `UMWELT_MAX_JOINT_STATES` through to this).
pub const DEFAULT_JOINT_CAP: u64 = 4096;

/// One agent's private mechanisms.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec<T: Scalar> {
    pub sensors: SpaceRef,
    pub agent: SpaceRef,
    pub actuators: SpaceRef,
    /// `W -> S_i`
    pub beta: Kernel<T>,
    /// `S_i x C_i -> C_i`
    pub phi: Kernel<T>,
    /// `C_i -> A_i`
    pub pi: Kernel<T>,
}

/// Two sensorimotor loops sharing one world and one world update.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoAgentModel<T: Scalar> {
    world: SpaceRef,
    agents: [AgentSpec<T>; 2],
    /// `A1 x A2 x W -> W`
    alpha: Kernel<T>,
    tol: T,
}

impl<T: Scalar> TwoAgentModel<T> {
    pub fn new(
        world: SpaceRef,
        agents: [AgentSpec<T>; 2],
        alpha: Kernel<T>,
        tol: T,
    ) -> Result<Self, ModelError> {
        use crate::kernel::{same_spaces, space_list_name};
        let expected_source = vec![
            agents[0].actuators.clone(),
            agents[1].actuators.clone(),
            world.clone(),
        ];
        if !same_spaces(alpha.source(), &expected_source)
            || !same_spaces(alpha.target(), &[world.clone()])
        {
            return Err(ModelError::KernelWiring {
                kernel: "alpha".to_owned(),
                expected_source: space_list_name(&expected_source),
                expected_target: world.name().to_owned(),
                found_source: space_list_name(alpha.source()),
                found_target: space_list_name(alpha.target()),
            });
        }
        for (i, agent) in agents.iter().enumerate() {
            let name = |k: &str| format!("{k}{}", i + 1);
            check(&name("beta"), &agent.beta, &[world.clone()], &[agent.sensors.clone()])?;
            check(
                &name("phi"),
                &agent.phi,
                &[agent.sensors.clone(), agent.agent.clone()],
                &[agent.agent.clone()],
            )?;
            check(&name("pi"), &agent.pi, &[agent.agent.clone()], &[agent.actuators.clone()])?;
        }
        Ok(TwoAgentModel {
            world,
            agents,
            alpha,
            tol,
        })
    }

    pub fn world(&self) -> &SpaceRef {
        &self.world
    }

    pub fn agent(&self, i: usize) -> &AgentSpec<T> {
        &self.agents[i]
    }

    pub fn alpha(&self) -> &Kernel<T> {
        &self.alpha
    }

    pub fn tolerance(&self) -> &T {
        &self.tol
    }

    /// Row of the joint update for actions `(a1, a2)` and world state `w`.
    pub fn alpha_row(&self, a1: usize, a2: usize, w: usize) -> &[T] {
        let n_w = self.world.len();
        let n_a2 = self.agents[1].actuators.len();
        self.alpha.row((a1 * n_a2 + a2) * n_w + w)
    }

    /// Validates stochasticity of all kernels, as in the single-agent case.
    pub fn validate(&self) -> Vec<crate::model::Violation> {
        let mut out = Vec::new();
        let mut check_kernel = |name: &str, kernel: &Kernel<T>| {
            for (i, row) in kernel.rows().iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    if *v < T::zero() {
                        out.push(crate::model::Violation::NegativeEntry {
                            kernel: name.to_owned(),
                            row: i,
                            col: j,
                        });
                    }
                }
                let sum: T = row.iter().cloned().sum();
                if !sum.approx_eq(&T::one(), &self.tol) {
                    out.push(crate::model::Violation::RowSum {
                        kernel: name.to_owned(),
                        row: i,
                        sum: sum.render(),
                    });
                }
            }
        };
        check_kernel("alpha", &self.alpha);
        for (i, agent) in self.agents.iter().enumerate() {
            check_kernel(&format!("beta{}", i + 1), &agent.beta);
            check_kernel(&format!("phi{}", i + 1), &agent.phi);
            check_kernel(&format!("pi{}", i + 1), &agent.pi);
        }
        out
    }
}

fn check<T: Scalar>(
    name: &str,
    kernel: &Kernel<T>,
    source: &[SpaceRef],
    target: &[SpaceRef],
) -> Result<(), ModelError> {
    use crate::kernel::{same_spaces, space_list_name};
    if !same_spaces(kernel.source(), source) || !same_spaces(kernel.target(), target) {
        return Err(ModelError::KernelWiring {
            kernel: name.to_owned(),
            expected_source: space_list_name(source),
            expected_target: space_list_name(target),
            found_source: space_list_name(kernel.source()),
            found_target: space_list_name(kernel.target()),
        });
    }
    Ok(())
}

/// Agent `i`'s outer-world loop: a single-agent model whose world states are
/// tuples `(w, s_j, c_j, a_j)` over the partner's coordinates.
#[derive(Debug, Clone)]
pub struct AgentView<T: Scalar> {
    pub agent_index: usize,
    pub model: LoopModel<T>,
    /// Component spaces of the view world, in order `(W, S_j, C_j, A_j)`.
    pub components: Vec<SpaceRef>,
}

/// Derives agent `i`'s view (indices 0 and 1).
///
/// One step of the view world: the shared update consumes this agent's
/// chosen action together with the partner's action recorded in the current
/// tuple, then the partner senses, updates, and acts:
/// `w' ~ alpha(a_i, a_j, w)`, `s_j' ~ beta_j(w')`, `c_j' ~ phi_j(s_j', c_j)`,
/// `a_j' ~ pi_j(c_j')`. The view sensor reads `beta_i` on the `W` component.
pub fn agent_view<T: Scalar>(
    m: &TwoAgentModel<T>,
    i: usize,
    cap: u64,
) -> Result<AgentView<T>, ModelError> {
    assert!(i < 2, "agent index must be 0 or 1");
    let j = 1 - i;
    let me = m.agent(i);
    let partner = m.agent(j);
    let components = vec![
        m.world().clone(),
        partner.sensors.clone(),
        partner.agent.clone(),
        partner.actuators.clone(),
    ];
    let indexer = ProductIndexer::new(&components);
    if indexer.len() as u64 > cap {
        return Err(ModelError::CapExceeded {
            what: format!("agent {} view world", i + 1),
            needed: indexer.len() as u64,
            cap,
        });
    }
    let view_w = product_space(format!("W{}", i + 1), &components)?;
    let n_view = view_w.len();
    let n_a = me.actuators.len();

    let mut alpha_rows = Vec::with_capacity(n_a * n_view);
    for a_i in 0..n_a {
        for idx in 0..n_view {
            let coords = indexer.unrank(idx);
            let (w, _s_j, c_j, a_j) = (coords[0], coords[1], coords[2], coords[3]);
            let mut row = vec![T::zero(); n_view];
            let world_row = match i {
                0 => m.alpha_row(a_i, a_j, w),
                _ => m.alpha_row(a_j, a_i, w),
            };
            for (w2, p_w) in world_row.iter().enumerate() {
                if p_w.is_zero() {
                    continue;
                }
                for s2 in 0..partner.sensors.len() {
                    let p_s = partner.beta.entry(w2, s2);
                    if p_s.is_zero() {
                        continue;
                    }
                    for c2 in 0..partner.agent.len() {
                        let p_c = partner.phi.entry(s2 * partner.agent.len() + c_j, c2);
                        if p_c.is_zero() {
                            continue;
                        }
                        for a2 in 0..partner.actuators.len() {
                            let p_a = partner.pi.entry(c2, a2);
                            if p_a.is_zero() {
                                continue;
                            }
                            let target = indexer.rank(&[w2, s2, c2, a2]);
                            let mass = p_w.clone() * p_s.clone() * p_c.clone() * p_a.clone();
                            row[target] = row[target].clone() + mass;
                        }
                    }
                }
            }
            alpha_rows.push(row);
        }
    }
    let alpha = Kernel::new(
        "alpha_view",
        vec![me.actuators.clone(), view_w.clone()],
        vec![view_w.clone()],
        alpha_rows,
    )?;

    let beta_rows: Vec<Vec<T>> = (0..n_view)
        .map(|idx| {
            let w = indexer.unrank(idx)[0];
            me.beta.row(w).to_vec()
        })
        .collect();
    let beta = Kernel::new(
        "beta_view",
        vec![view_w.clone()],
        vec![me.sensors.clone()],
        beta_rows,
    )?;

    let memoryless = phi_is_memoryless(&me.phi, me.sensors.len(), me.agent.len(), m.tolerance());
    let model = LoopModel::new(
        view_w,
        me.sensors.clone(),
        me.agent.clone(),
        me.actuators.clone(),
        alpha,
        beta,
        me.phi.clone(),
        me.pi.clone(),
        None,
        memoryless,
        m.tolerance().clone(),
    )?;
    Ok(AgentView {
        agent_index: i,
        model,
        components,
    })
}

fn phi_is_memoryless<T: Scalar>(phi: &Kernel<T>, n_s: usize, n_c: usize, tol: &T) -> bool {
    (0..n_s).all(|s| {
        let base = phi.row(s * n_c);
        (1..n_c).all(|c| {
            phi.row(s * n_c + c)
                .iter()
                .zip(base)
                .all(|(a, b)| a.approx_eq(b, tol))
        })
    })
}

/// Shared-distinction analysis over the full joint space
/// `(w, s1, c1, a1, s2, c2, a2)`.
#[derive(Debug, Clone)]
pub struct SharedDistinctions {
    /// Full joint state space the partitions below live on.
    pub joint: SpaceRef,
    /// Per-agent intrinsic partitions lifted to the joint space.
    pub lifted_intrinsic: [Partition; 2],
    /// Per-agent extrinsic partitions lifted to the joint space.
    pub lifted_sep: [Partition; 2],
    /// Meet of the lifted intrinsic partitions: distinctions both agents make.
    pub meet_intrinsic: Partition,
    /// For each meet block, whether it is a cylinder over `W` (membership
    /// depends on the world coordinate only).
    pub intrinsic_blocks_are_w_cylinders: Vec<bool>,
    /// The shared distinctions restricted to the common world: the finest
    /// partition of `W` whose cylinder lift both agents' σ-algebras contain.
    pub shared_w_intrinsic: Partition,
    /// Same three results for the extrinsic pair.
    pub meet_sep: Partition,
    pub sep_blocks_are_w_cylinders: Vec<bool>,
    pub shared_w_sep: Partition,
}

pub fn shared_distinctions<T: Scalar>(
    m: &TwoAgentModel<T>,
    cap: u64,
) -> Result<SharedDistinctions, ModelError> {
    let spaces = [
        m.world().clone(),
        m.agent(0).sensors.clone(),
        m.agent(0).agent.clone(),
        m.agent(0).actuators.clone(),
        m.agent(1).sensors.clone(),
        m.agent(1).agent.clone(),
        m.agent(1).actuators.clone(),
    ];
    let joint_indexer = ProductIndexer::new(&spaces);
    if joint_indexer.len() as u64 > cap {
        return Err(ModelError::CapExceeded {
            what: "joint two-agent state space".to_owned(),
            needed: joint_indexer.len() as u64,
            cap,
        });
    }
    let joint = product_space("W12", &spaces)?;

    let mut lifted_intrinsic = Vec::with_capacity(2);
    let mut lifted_sep = Vec::with_capacity(2);
    for i in 0..2 {
        let view = agent_view(m, i, cap)?;
        let intr = intrinsic_partition(&view.model);
        let (sep, _) = w_sep(&view.model);
        lifted_intrinsic.push(lift_view_partition(&intr.partition, i, &spaces, &joint, &joint_indexer));
        lifted_sep.push(lift_view_partition(&sep, i, &spaces, &joint, &joint_indexer));
    }
    let lifted_intrinsic: [Partition; 2] = [
        lifted_intrinsic[0].clone(),
        lifted_intrinsic[1].clone(),
    ];
    let lifted_sep: [Partition; 2] = [lifted_sep[0].clone(), lifted_sep[1].clone()];

    let meet_intrinsic = lifted_intrinsic[0].meet(&lifted_intrinsic[1])?;
    let meet_sep = lifted_sep[0].meet(&lifted_sep[1])?;
    let n_w = m.world().len();
    let intrinsic_blocks_are_w_cylinders =
        cylinder_flags(&meet_intrinsic, &joint_indexer, n_w, joint_indexer.len());
    let sep_blocks_are_w_cylinders =
        cylinder_flags(&meet_sep, &joint_indexer, n_w, joint_indexer.len());
    let shared_w_intrinsic = shared_world_partition(m.world(), &meet_intrinsic, &joint_indexer);
    let shared_w_sep = shared_world_partition(m.world(), &meet_sep, &joint_indexer);

    Ok(SharedDistinctions {
        joint,
        lifted_intrinsic,
        lifted_sep,
        meet_intrinsic,
        intrinsic_blocks_are_w_cylinders,
        shared_w_intrinsic,
        meet_sep,
        sep_blocks_are_w_cylinders,
        shared_w_sep,
    })
}

/// Lifts a partition of agent `i`'s view world `(w, s_j, c_j, a_j)` to the
/// joint space: joint states are grouped by the block of their projection,
/// leaving the agent's own coordinates free.
fn lift_view_partition(
    view_partition: &Partition,
    agent: usize,
    spaces: &[SpaceRef; 7],
    joint: &SpaceRef,
    joint_indexer: &ProductIndexer,
) -> Partition {
    // joint coordinate order: (w, s1, c1, a1, s2, c2, a2)
    let view_coord_positions: [usize; 4] = if agent == 0 {
        [0, 4, 5, 6] // agent 1 sees (w, s2, c2, a2)
    } else {
        [0, 1, 2, 3] // agent 2 sees (w, s1, c1, a1)
    };
    let view_sizes: Vec<usize> = view_coord_positions
        .iter()
        .map(|&p| spaces[p].len())
        .collect();
    let assignment: Vec<usize> = (0..joint_indexer.len())
        .map(|idx| {
            let coords = joint_indexer.unrank(idx);
            let mut view_rank = 0;
            for (&pos, &size) in view_coord_positions.iter().zip(&view_sizes) {
                view_rank = view_rank * size + coords[pos];
            }
            view_partition.block_of(view_rank)
        })
        .collect();
    Partition::from_assignment(joint.clone(), &assignment)
}

/// Whether each block only constrains the world coordinate.
fn cylinder_flags(
    p: &Partition,
    joint_indexer: &ProductIndexer,
    n_w: usize,
    joint_size: usize,
) -> Vec<bool> {
    let fiber = joint_size / n_w;
    p.blocks()
        .iter()
        .map(|block| {
            // a W-cylinder block has every state whose w-coordinate appears
            let mut w_seen = vec![false; n_w];
            for &s in block {
                w_seen[joint_indexer.unrank(s)[0]] = true;
            }
            let expected: usize = w_seen.iter().filter(|&&b| b).count() * fiber;
            block.len() == expected
        })
        .collect()
}

/// Atoms of the σ-algebra of world events whose cylinders are measurable in
/// `p`'s σ-algebra: world states are linked when some block of `p` contains
/// joint states carrying both.
fn shared_world_partition(
    world: &SpaceRef,
    p: &Partition,
    joint_indexer: &ProductIndexer,
) -> Partition {
    let n_w = world.len();
    let mut assignment: Vec<usize> = (0..n_w).collect();
    // union-find over world coordinates via block spans
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for block in p.blocks() {
        let mut first: Option<usize> = None;
        for &s in block {
            let w = joint_indexer.unrank(s)[0];
            match first {
                None => first = Some(w),
                Some(f) => {
                    let (ra, rb) = (find(&mut assignment, f), find(&mut assignment, w));
                    if ra != rb {
                        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                        assignment[hi] = lo;
                    }
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n_w).map(|w| find(&mut assignment, w)).collect();
    Partition::from_assignment(world.clone(), &roots)
}

/// Classification of a single-agent model for the degenerate-agent table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentClass {
    /// `|A| = 1`: can observe, cannot act.
    PassiveObserver,
    /// `|S| = 1`: can act, cannot observe.
    BlindActor,
    /// Both degenerate.
    Inert,
    General,
}

/// The world-as-sensed and the intrinsic partition side by side, with the
/// degenerate-agent classification.
#[derive(Debug, Clone)]
pub struct UmweltTable {
    pub class: AgentClass,
    /// σ(beta): the world as sensed in one reading.
    pub merk: Partition,
    pub intrinsic: Partition,
    pub merk_trivial: bool,
    pub intrinsic_trivial: bool,
    /// Always true: the intrinsic partition refines the sensed one.
    pub intrinsic_refines_merk: bool,
}

pub fn umwelt_table<T: Scalar>(model: &LoopModel<T>) -> UmweltTable {
    let class = match (model.sensors().len() == 1, model.actuators().len() == 1) {
        (true, true) => AgentClass::Inert,
        (true, false) => AgentClass::BlindActor,
        (false, true) => AgentClass::PassiveObserver,
        (false, false) => AgentClass::General,
    };
    let merk = sigma_beta(model);
    let intrinsic = intrinsic_partition(model).partition;
    UmweltTable {
        class,
        merk_trivial: merk.is_trivial(),
        intrinsic_trivial: intrinsic.is_trivial(),
        intrinsic_refines_merk: intrinsic.refines(&merk),
        merk,
        intrinsic,
    }
}
