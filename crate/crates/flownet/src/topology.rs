//! Graph representation of a process network: nodes, branches, incidence
//! matrices, and branch partitions.
//!
//! Orientation convention: a branch is the ordered pair `from → to`; flow is
//! positive along the arrow and the branch potential difference is
//! `W = w(from) − w(to)`. The full incidence matrix has `+1` where a branch
//! leaves a node and `−1` where it enters; the reduced matrix deletes the
//! datum row.
//!
//! Row order is canonical: dynamic nodes in declaration order, then
//! non-datum terminals in declaration order, then the datum last. Columns
//! follow branch declaration order.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::constitutive::{CapacitiveLaw, ResistiveLaw};
use crate::control::ControllerSpec;

/// Role of a node in the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Holds an inventory through a capacitive law.
    Dynamic,
    /// Boundary node with a fixed potential or fixed flow.
    Terminal,
    /// The reference node; its incidence row is deleted in the reduced
    /// matrix and its potential defaults to zero.
    Datum,
}

/// Kind of a branch, which decides how its flow is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    /// Flow from a resistive law of the potential difference.
    Resistive,
    /// Flow assigned by an inventory controller.
    Controlled,
    /// Flow fixed by a flow boundary condition at a terminal.
    TerminalSource,
    /// Drift/production term housed as a resistive branch to the datum.
    Production,
}

/// A named node.
#[derive(Debug, Clone)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub capacitive: Option<CapacitiveLaw>,
}

/// A named oriented branch between two node indices (canonical order).
#[derive(Debug, Clone)]
pub struct Branch {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub kind: BranchKind,
    pub law: Option<ResistiveLaw>,
}

impl Branch {
    /// Incidence sign of this branch at `node`: +1 leaving, −1 entering,
    /// 0 not incident.
    pub fn sign_at(&self, node: usize) -> f64 {
        if self.from == node {
            1.0
        } else if self.to == node {
            -1.0
        } else {
            0.0
        }
    }

    pub fn is_incident(&self, node: usize) -> bool {
        self.from == node || self.to == node
    }

    /// The endpoint opposite `node`.
    pub fn opposite(&self, node: usize) -> usize {
        if self.from == node {
            self.to
        } else {
            self.from
        }
    }
}

/// Validation errors raised while constructing a [`ProcessNetwork`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate branch id `{0}`")]
    DuplicateBranch(String),
    #[error("branch `{branch}` references unknown node `{node}`")]
    UnknownNode { branch: String, node: String },
    #[error("branch `{0}` connects a node to itself")]
    SelfLoop(String),
    #[error("network must declare exactly one datum node, found {0}")]
    DatumCount(usize),
    #[error("dynamic node `{0}` has no capacitive law")]
    MissingCapacitiveLaw(String),
    #[error("non-dynamic node `{0}` must not carry a capacitive law")]
    UnexpectedCapacitiveLaw(String),
    #[error("resistive branch `{0}` has no resistive law")]
    MissingResistiveLaw(String),
    #[error("controlled branch `{0}` must not carry a law; its flow is assigned by a controller")]
    ControlledBranchWithLaw(String),
    #[error("production branch `{0}` must connect a dynamic node and the datum")]
    BadProductionEndpoints(String),
    #[error("production branch `{0}` has no law")]
    MissingProductionLaw(String),
    #[error("terminal-source branch `{0}` must touch a terminal or the datum")]
    SourceWithoutTerminal(String),
    #[error("inductive constitutive laws are not supported")]
    InductiveUnsupported,
    #[error("controller references unknown node `{0}`")]
    ControllerUnknownNode(String),
    #[error("controller references unknown branch `{0}`")]
    ControllerUnknownBranch(String),
    #[error("controller on `{0}`: node is not dynamic")]
    ControllerNodeNotDynamic(String),
    #[error("controller branch `{branch}` is not incident to node `{node}`")]
    ControllerNotIncident { node: String, branch: String },
    #[error("controller branch `{0}` is not of controlled kind")]
    ControllerBranchNotControlled(String),
    #[error("node `{0}` has more than one controller")]
    DuplicateController(String),
    #[error("controlled branch `{0}` has no controller")]
    UncontrolledBranch(String),
    #[error("controlled branch `{0}` is actuated for more than one node")]
    SharedControlledBranch(String),
    #[error("controller on `{0}`: gain must be positive")]
    NonPositiveGain(String),
    #[error("controller on `{0}`: bounds must satisfy lower <= upper")]
    BadBounds(String),
    #[error(
        "controlled branch `{branch}` joins two controlled nodes; direct control requires \
         a dedicated actuator per node"
    )]
    NonDirectControl { branch: String },
}

/// Index sets partitioning the branch columns by kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchPartitions {
    /// Resistive and production columns.
    pub resistive: Vec<usize>,
    /// Controlled columns.
    pub controlled: Vec<usize>,
    /// Terminal-source columns.
    pub terminal: Vec<usize>,
}

/// Column-wise slices of the reduced incidence matrix by branch kind.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMatrices {
    pub a_r: DMatrix<f64>,
    pub a_k: DMatrix<f64>,
    pub a_t: DMatrix<f64>,
}

/// A validated process network with materialized incidence matrices.
///
/// Immutable after construction; cheap to share behind a reference.
#[derive(Debug, Clone)]
pub struct ProcessNetwork {
    nodes: Vec<Node>,
    branches: Vec<Branch>,
    controllers: Vec<ControllerSpec>,
    a_full: DMatrix<f64>,
    n_dynamic: usize,
}

impl ProcessNetwork {
    pub fn builder() -> NetworkBuilder {
        NetworkBuilder::default()
    }

    /// Nodes in canonical order (dynamic, terminals, datum).
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Branches in declaration order.
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn controllers(&self) -> &[ControllerSpec] {
        &self.controllers
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    /// Number of dynamic nodes (the first rows of the incidence matrices).
    pub fn dynamic_count(&self) -> usize {
        self.n_dynamic
    }

    /// Index of the datum node (always the last row of `a_full`).
    pub fn datum_index(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn branch_index(&self, id: &str) -> Option<usize> {
        self.branches.iter().position(|b| b.id == id)
    }

    pub fn node(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    pub fn branch(&self, index: usize) -> &Branch {
        &self.branches[index]
    }

    /// Dynamic node indices, `0..dynamic_count()` by construction.
    pub fn dynamic_nodes(&self) -> impl Iterator<Item = usize> {
        0..self.n_dynamic
    }

    /// Indices of non-dynamic nodes (terminals then datum).
    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.n_dynamic..self.nodes.len()
    }

    /// Full incidence matrix (`node_count × branch_count`); every column has
    /// exactly one `+1` and one `−1`.
    pub fn a_full(&self) -> &DMatrix<f64> {
        &self.a_full
    }

    /// Reduced incidence matrix: `a_full` with the datum row deleted.
    pub fn a_reduced(&self) -> DMatrix<f64> {
        self.a_full.rows(0, self.nodes.len() - 1).into_owned()
    }

    /// Dynamic-node rows of the incidence matrix.
    pub fn a_dynamic(&self) -> DMatrix<f64> {
        self.a_full.rows(0, self.n_dynamic).into_owned()
    }

    /// Incidence sign of branch `b` at node `n`.
    pub fn sign(&self, node: usize, branch: usize) -> f64 {
        self.branches[branch].sign_at(node)
    }

    /// Branch indices incident to a node.
    pub fn incident_branches(&self, node: usize) -> Vec<usize> {
        self.branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_incident(node))
            .map(|(i, _)| i)
            .collect()
    }

    /// Partition of branch columns by kind (resistive covers production).
    pub fn partitions(&self) -> BranchPartitions {
        let mut parts = BranchPartitions {
            resistive: Vec::new(),
            controlled: Vec::new(),
            terminal: Vec::new(),
        };
        for (i, b) in self.branches.iter().enumerate() {
            match b.kind {
                BranchKind::Resistive | BranchKind::Production => parts.resistive.push(i),
                BranchKind::Controlled => parts.controlled.push(i),
                BranchKind::TerminalSource => parts.terminal.push(i),
            }
        }
        parts
    }

    /// Column-wise slices of the reduced incidence matrix per partition.
    pub fn partition_matrices(&self) -> PartitionMatrices {
        let reduced = self.a_reduced();
        let parts = self.partitions();
        let slice = |cols: &[usize]| {
            let mut m = DMatrix::zeros(reduced.nrows(), cols.len());
            for (j, &c) in cols.iter().enumerate() {
                m.set_column(j, &reduced.column(c));
            }
            m
        };
        PartitionMatrices {
            a_r: slice(&parts.resistive),
            a_k: slice(&parts.controlled),
            a_t: slice(&parts.terminal),
        }
    }

    /// True when no branch touches a terminal or the datum: the network
    /// exchanges nothing with the environment.
    pub fn is_closed(&self) -> bool {
        self.branches
            .iter()
            .all(|b| b.from < self.n_dynamic && b.to < self.n_dynamic)
    }

    /// Controller actuating a given node, if any.
    pub fn controller_for_node(&self, node: usize) -> Option<&ControllerSpec> {
        self.controllers.iter().find(|c| c.node == node)
    }

    /// The capacitive law of a dynamic node.
    pub fn capacitive_law(&self, node: usize) -> &CapacitiveLaw {
        self.nodes[node]
            .capacitive
            .as_ref()
            .expect("dynamic node validated to carry a capacitive law")
    }

    /// All-linear check used by the variational fast path: every law-bearing
    /// branch linear and every capacitive law linear.
    pub fn is_all_linear(&self) -> bool {
        let branches_linear = self.branches.iter().all(|b| match b.kind {
            BranchKind::Resistive | BranchKind::Production => {
                b.law.as_ref().is_some_and(|l| l.is_linear())
            }
            _ => true,
        });
        let caps_linear = self
            .nodes
            .iter()
            .take(self.n_dynamic)
            .all(|n| n.capacitive.as_ref().is_some_and(|c| c.is_linear()));
        branches_linear && caps_linear
    }
}

/// Declaration of a node before canonical ordering.
#[derive(Debug, Clone)]
struct NodeDecl {
    id: String,
    kind: NodeKind,
    capacitive: Option<CapacitiveLaw>,
}

#[derive(Debug, Clone)]
struct BranchDecl {
    id: String,
    from: String,
    to: String,
    kind: BranchKind,
    law: Option<ResistiveLaw>,
}

#[derive(Debug, Clone)]
struct ControllerDecl {
    node: String,
    branch: String,
    gain: f64,
    setpoint: f64,
    bounds: Option<(f64, f64)>,
}

/// Incremental construction of a [`ProcessNetwork`]; `build` validates the
/// assembled declarations.
#[derive(Debug, Default, Clone)]
pub struct NetworkBuilder {
    nodes: Vec<NodeDecl>,
    branches: Vec<BranchDecl>,
    controllers: Vec<ControllerDecl>,
}

impl NetworkBuilder {
    pub fn dynamic(mut self, id: &str, law: CapacitiveLaw) -> Self {
        self.nodes.push(NodeDecl {
            id: id.to_string(),
            kind: NodeKind::Dynamic,
            capacitive: Some(law),
        });
        self
    }

    pub fn terminal(mut self, id: &str) -> Self {
        self.nodes.push(NodeDecl {
            id: id.to_string(),
            kind: NodeKind::Terminal,
            capacitive: None,
        });
        self
    }

    pub fn datum(mut self, id: &str) -> Self {
        self.nodes.push(NodeDecl {
            id: id.to_string(),
            kind: NodeKind::Datum,
            capacitive: None,
        });
        self
    }

    pub fn resistive(mut self, id: &str, from: &str, to: &str, law: ResistiveLaw) -> Self {
        self.branches.push(BranchDecl {
            id: id.to_string(),
            from: from.to_string(),
            to: to.to_string(),
            kind: BranchKind::Resistive,
            law: Some(law),
        });
        self
    }

    pub fn controlled(mut self, id: &str, from: &str, to: &str) -> Self {
        self.branches.push(BranchDecl {
            id: id.to_string(),
            from: from.to_string(),
            to: to.to_string(),
            kind: BranchKind::Controlled,
            law: None,
        });
        self
    }

    pub fn production(mut self, id: &str, from: &str, to: &str, law: ResistiveLaw) -> Self {
        self.branches.push(BranchDecl {
            id: id.to_string(),
            from: from.to_string(),
            to: to.to_string(),
            kind: BranchKind::Production,
            law: Some(law),
        });
        self
    }

    pub fn source(mut self, id: &str, from: &str, to: &str, law: Option<ResistiveLaw>) -> Self {
        self.branches.push(BranchDecl {
            id: id.to_string(),
            from: from.to_string(),
            to: to.to_string(),
            kind: BranchKind::TerminalSource,
            law,
        });
        self
    }

    pub fn controller(
        mut self,
        node: &str,
        branch: &str,
        gain: f64,
        setpoint: f64,
        bounds: Option<(f64, f64)>,
    ) -> Self {
        self.controllers.push(ControllerDecl {
            node: node.to_string(),
            branch: branch.to_string(),
            gain,
            setpoint,
            bounds,
        });
        self
    }

    /// Validate the declarations and materialize the incidence matrices.
    pub fn build(self) -> Result<ProcessNetwork, NetworkError> {
        // unique node ids
        for (i, n) in self.nodes.iter().enumerate() {
            if self.nodes[..i].iter().any(|m| m.id == n.id) {
                return Err(NetworkError::DuplicateNode(n.id.clone()));
            }
        }
        // exactly one datum
        let datum_count = self
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Datum)
            .count();
        if datum_count != 1 {
            return Err(NetworkError::DatumCount(datum_count));
        }
        // law placement per node kind
        for n in &self.nodes {
            match n.kind {
                NodeKind::Dynamic => {
                    if n.capacitive.is_none() {
                        return Err(NetworkError::MissingCapacitiveLaw(n.id.clone()));
                    }
                }
                NodeKind::Terminal | NodeKind::Datum => {
                    if n.capacitive.is_some() {
                        return Err(NetworkError::UnexpectedCapacitiveLaw(n.id.clone()));
                    }
                }
            }
        }

        // canonical node order: dynamic (decl order), terminals, datum
        let mut nodes: Vec<Node> = Vec::with_capacity(self.nodes.len());
        for kind in [NodeKind::Dynamic, NodeKind::Terminal, NodeKind::Datum] {
            for n in self.nodes.iter().filter(|n| n.kind == kind) {
                nodes.push(Node {
                    id: n.id.clone(),
                    kind: n.kind,
                    capacitive: n.capacitive.clone(),
                });
            }
        }
        let index_of = |id: &str| nodes.iter().position(|n| n.id == id);
        let n_dynamic = nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Dynamic)
            .count();

        // branches: unique ids, known endpoints, no self-loops
        let mut branches: Vec<Branch> = Vec::with_capacity(self.branches.len());
        for (i, b) in self.branches.iter().enumerate() {
            if self.branches[..i].iter().any(|c| c.id == b.id) {
                return Err(NetworkError::DuplicateBranch(b.id.clone()));
            }
            let from = index_of(&b.from).ok_or_else(|| NetworkError::UnknownNode {
                branch: b.id.clone(),
                node: b.from.clone(),
            })?;
            let to = index_of(&b.to).ok_or_else(|| NetworkError::UnknownNode {
                branch: b.id.clone(),
                node: b.to.clone(),
            })?;
            if from == to {
                return Err(NetworkError::SelfLoop(b.id.clone()));
            }
            branches.push(Branch {
                id: b.id.clone(),
                from,
                to,
                kind: b.kind,
                law: b.law.clone(),
            });
        }

        // per-kind branch constraints
        let datum = nodes.len() - 1;
        for b in &branches {
            match b.kind {
                BranchKind::Resistive => {
                    if b.law.is_none() {
                        return Err(NetworkError::MissingResistiveLaw(b.id.clone()));
                    }
                }
                BranchKind::Controlled => {
                    if b.law.is_some() {
                        return Err(NetworkError::ControlledBranchWithLaw(b.id.clone()));
                    }
                }
                BranchKind::Production => {
                    if b.law.is_none() {
                        return Err(NetworkError::MissingProductionLaw(b.id.clone()));
                    }
                    let touches_datum = b.from == datum || b.to == datum;
                    let touches_dynamic = b.from < n_dynamic || b.to < n_dynamic;
                    if !(touches_datum && touches_dynamic) {
                        return Err(NetworkError::BadProductionEndpoints(b.id.clone()));
                    }
                }
                BranchKind::TerminalSource => {
                    let boundary =
                        |i: usize| nodes[i].kind != NodeKind::Dynamic;
                    if !boundary(b.from) && !boundary(b.to) {
                        return Err(NetworkError::SourceWithoutTerminal(b.id.clone()));
                    }
                }
            }
        }

        // controllers
        let mut controllers: Vec<ControllerSpec> = Vec::with_capacity(self.controllers.len());
        for c in &self.controllers {
            let node = index_of(&c.node)
                .ok_or_else(|| NetworkError::ControllerUnknownNode(c.node.clone()))?;
            let branch = branches
                .iter()
                .position(|b| b.id == c.branch)
                .ok_or_else(|| NetworkError::ControllerUnknownBranch(c.branch.clone()))?;
            if nodes[node].kind != NodeKind::Dynamic {
                return Err(NetworkError::ControllerNodeNotDynamic(c.node.clone()));
            }
            if branches[branch].kind != BranchKind::Controlled {
                return Err(NetworkError::ControllerBranchNotControlled(c.branch.clone()));
            }
            if !branches[branch].is_incident(node) {
                return Err(NetworkError::ControllerNotIncident {
                    node: c.node.clone(),
                    branch: c.branch.clone(),
                });
            }
            if !(c.gain > 0.0) {
                return Err(NetworkError::NonPositiveGain(c.node.clone()));
            }
            if let Some((lo, hi)) = c.bounds {
                if lo > hi {
                    return Err(NetworkError::BadBounds(c.node.clone()));
                }
            }
            if controllers.iter().any(|other| other.node == node) {
                return Err(NetworkError::DuplicateController(c.node.clone()));
            }
            if controllers.iter().any(|other| other.branch == branch) {
                return Err(NetworkError::SharedControlledBranch(c.branch.clone()));
            }
            controllers.push(ControllerSpec {
                node,
                branch,
                gain: c.gain,
                setpoint: c.setpoint,
                bounds: c.bounds,
            });
        }
        for (i, b) in branches.iter().enumerate() {
            if b.kind == BranchKind::Controlled
                && !controllers.iter().any(|c| c.branch == i)
            {
                return Err(NetworkError::UncontrolledBranch(b.id.clone()));
            }
        }
        // directness: the far end of an actuated branch must not itself be a
        // controlled node, so the controlled-incidence block stays diagonal
        for c in &controllers {
            let far = branches[c.branch].opposite(c.node);
            if controllers.iter().any(|other| other.node == far) {
                return Err(NetworkError::NonDirectControl {
                    branch: branches[c.branch].id.clone(),
                });
            }
        }

        // incidence matrix
        let mut a_full = DMatrix::zeros(nodes.len(), branches.len());
        for (j, b) in branches.iter().enumerate() {
            a_full[(b.from, j)] = 1.0;
            a_full[(b.to, j)] = -1.0;
        }

        Ok(ProcessNetwork {
            nodes,
            branches,
            controllers,
            a_full,
            n_dynamic,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{CapacitiveLaw, ResistiveLaw};

    /// The canonical two-pipeline example: terminals T1 (supply) and T2
    /// (datum), dynamic tanks P1 and P2, four linear branches.
    pub(crate) fn two_tank() -> ProcessNetwork {
        ProcessNetwork::builder()
            .dynamic("P1", CapacitiveLaw::linear(2.0))
            .dynamic("P2", CapacitiveLaw::linear(2.0))
            .terminal("T1")
            .datum("T2")
            .resistive("F1", "T1", "P1", ResistiveLaw::linear(1.0))
            .resistive("F2", "P1", "T2", ResistiveLaw::linear(2.0))
            .resistive("F3", "T1", "P2", ResistiveLaw::linear(3.0))
            .resistive("F4", "P2", "T2", ResistiveLaw::linear(4.0))
            .build()
            .unwrap()
    }

    #[test]
    fn two_tank_full_incidence_matches_hand_enumeration() {
        let net = two_tank();
        assert_eq!(net.node_count(), 4);
        assert_eq!(net.branch_count(), 4);
        // canonical rows: P1, P2, T1, T2(datum)
        let ids: Vec<&str> = net.nodes().iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, vec!["P1", "P2", "T1", "T2"]);
        let a = net.a_full();
        // column F1 = T1 -> P1: +1 at T1 (row 2), −1 at P1 (row 0)
        assert_eq!(a[(2, 0)], 1.0);
        assert_eq!(a[(0, 0)], -1.0);
        assert_eq!(a[(1, 0)], 0.0);
        assert_eq!(a[(3, 0)], 0.0);
        // every column has exactly one +1 and one −1
        for j in 0..4 {
            let col = a.column(j);
            assert_eq!(col.iter().filter(|&&v| v == 1.0).count(), 1);
            assert_eq!(col.iter().filter(|&&v| v == -1.0).count(), 1);
            assert_eq!(col.iter().filter(|&&v| v == 0.0).count(), 2);
        }
    }

    #[test]
    fn single_node_no_branch_network_is_valid() {
        let net = ProcessNetwork::builder()
            .dynamic("P1", CapacitiveLaw::linear(1.0))
            .datum("D")
            .build()
            .unwrap();
        assert_eq!(net.a_full().nrows(), 2);
        assert_eq!(net.a_full().ncols(), 0);
        // a truly isolated inventory: 1 dynamic row, no columns
        assert_eq!(net.a_dynamic().shape(), (1, 0));
    }

    #[test]
    fn self_loop_is_rejected() {
        let err = ProcessNetwork::builder()
            .dynamic("P1", CapacitiveLaw::linear(1.0))
            .datum("D")
            .resistive("F1", "P1", "P1", ResistiveLaw::linear(1.0))
            .build()
            .unwrap_err();
        assert_eq!(err, NetworkError::SelfLoop("F1".into()));
    }

    #[test]
    fn duplicate_and_unknown_ids_are_rejected() {
        let err = ProcessNetwork::builder()
            .dynamic("P1", CapacitiveLaw::linear(1.0))
            .dynamic("P1", CapacitiveLaw::linear(1.0))
            .datum("D")
            .build()
            .unwrap_err();
        assert_eq!(err, NetworkError::DuplicateNode("P1".into()));

        let err = ProcessNetwork::builder()
            .dynamic("P1", CapacitiveLaw::linear(1.0))
            .datum("D")
            .resistive("F1", "P1", "NOPE", ResistiveLaw::linear(1.0))
            .build()
            .unwrap_err();
        assert!(matches!(err, NetworkError::UnknownNode { .. }));
    }

    #[test]
    fn datum_multiplicity_is_rejected() {
        let err = ProcessNetwork::builder()
            .dynamic("P1", CapacitiveLaw::linear(1.0))
            .build()
            .unwrap_err();
        assert_eq!(err, NetworkError::DatumCount(0));
        let err = ProcessNetwork::builder()
            .datum("D1")
            .datum("D2")
            .build()
            .unwrap_err();
        assert_eq!(err, NetworkError::DatumCount(2));
    }

    #[test]
    fn reduced_incidence_deletes_datum_row() {
        let net = two_tank();
        let reduced = net.a_reduced();
        assert_eq!(reduced.shape(), (3, 4));
        let full = net.a_full();
        for i in 0..3 {
            for j in 0..4 {
                assert_eq!(reduced[(i, j)], full[(i, j)]);
            }
        }
    }

    #[test]
    fn one_branch_to_datum_reduces_to_single_entry() {
        let net = ProcessNetwork::builder()
            .dynamic("P1", CapacitiveLaw::linear(1.0))
            .datum("D")
            .resistive("F1", "P1", "D", ResistiveLaw::linear(1.0))
            .build()
            .unwrap();
        let reduced = net.a_reduced();
        assert_eq!(reduced.shape(), (1, 1));
        assert_eq!(reduced[(0, 0)], 1.0);

        let net = ProcessNetwork::builder()
            .dynamic("P1", CapacitiveLaw::linear(1.0))
            .datum("D")
            .resistive("F1", "D", "P1", ResistiveLaw::linear(1.0))
            .build()
            .unwrap();
        assert_eq!(net.a_reduced()[(0, 0)], -1.0);
    }

    #[test]
    fn closed_loop_columns_sum_to_zero_over_all_rows() {
        let net = ProcessNetwork::builder()
            .dynamic("P1", CapacitiveLaw::linear(1.0))
            .dynamic("P2", CapacitiveLaw::linear(1.0))
            .datum("D")
            .resistive("Fab", "P1", "P2", ResistiveLaw::linear(1.0))
            .resistive("Fba", "P2", "P1", ResistiveLaw::linear(1.0))
            .build()
            .unwrap();
        assert!(net.is_closed());
        let full = net.a_full();
        for j in 0..2 {
            assert_eq!(full.column(j).sum(), 0.0);
        }
        // over the reduced rows, the deleted (datum) entry is zero so
        // reduced columns also sum to zero here
        let reduced = net.a_reduced();
        for j in 0..2 {
            assert_eq!(reduced.column(j).sum(), 0.0);
        }
    }

    #[test]
    fn partitions_split_columns_by_kind() {
        // controlled variant of the two-tank: F2,F4 actuated
        let net = ProcessNetwork::builder()
            .dynamic("P1", CapacitiveLaw::linear(2.0))
            .dynamic("P2", CapacitiveLaw::linear(2.0))
            .terminal("T1")
            .datum("T2")
            .resistive("F1", "T1", "P1", ResistiveLaw::linear(1.0))
            .controlled("F2", "P1", "T2")
            .resistive("F3", "T1", "P2", ResistiveLaw::linear(3.0))
            .controlled("F4", "P2", "T2")
            .controller("P1", "F2", 1.0, 1.0, None)
            .controller("P2", "F4", 1.0, 2.0, None)
            .build()
            .unwrap();
        let parts = net.partitions();
        assert_eq!(parts.controlled, vec![1, 3]);
        assert_eq!(parts.resistive, vec![0, 2]);
        assert!(parts.terminal.is_empty());
        let mats = net.partition_matrices();
        assert_eq!(mats.a_k.shape(), (3, 2));
        assert_eq!(mats.a_r.shape(), (3, 2));
        assert_eq!(mats.a_t.shape(), (3, 0));
        // concatenating the slices reproduces the reduced matrix up to the
        // column permutation (resistive | controlled | terminal)
        let reduced = net.a_reduced();
        let order: Vec<usize> = parts
            .resistive
            .iter()
            .chain(parts.controlled.iter())
            .chain(parts.terminal.iter())
            .copied()
            .collect();
        for (slot, &col) in order.iter().enumerate() {
            let from_slices = if slot < 2 {
                mats.a_r.column(slot).into_owned()
            } else {
                mats.a_k.column(slot - 2).into_owned()
            };
            assert_eq!(from_slices, reduced.column(col).into_owned());
        }
    }

    #[test]
    fn empty_partitions_for_uncontrolled_and_all_terminal_networks() {
        let net = two_tank();
        let parts = net.partitions();
        assert!(parts.controlled.is_empty());
        assert_eq!(parts.resistive.len(), 4);

        let net = ProcessNetwork::builder()
            .terminal("S")
            .datum("D")
            .source("Fs", "S", "D", None)
            .build()
            .unwrap();
        let parts = net.partitions();
        assert!(parts.resistive.is_empty());
        assert!(parts.controlled.is_empty());
        assert_eq!(parts.terminal, vec![0]);
    }

    #[test]
    fn dynamic_node_requires_capacitive_law_via_kind_checks() {
        // builder API always supplies a law for dynamic(); exercise the
        // validation through a terminal carrying a law instead
        let err = ProcessNetwork::builder()
            .dynamic("P", CapacitiveLaw::linear(1.0))
            .datum("D")
            .resistive("F", "P", "D", ResistiveLaw::linear(1.0))
            .controller("P", "F", 1.0, 0.0, None)
            .build()
            .unwrap_err();
        assert_eq!(err, NetworkError::ControllerBranchNotControlled("F".into()));
    }

    #[test]
    fn production_branch_must_join_dynamic_and_datum() {
        let err = ProcessNetwork::builder()
            .dynamic("P1", CapacitiveLaw::linear(1.0))
            .terminal("T")
            .datum("D")
            .production("Pr", "P1", "T", ResistiveLaw::linear(1.0))
            .build()
            .unwrap_err();
        assert_eq!(err, NetworkError::BadProductionEndpoints("Pr".into()));

        let ok = ProcessNetwork::builder()
            .dynamic("P1", CapacitiveLaw::linear(1.0))
            .datum("D")
            .production("Pr", "P1", "D", ResistiveLaw::linear(1.0))
            .build();
        assert!(ok.is_ok());
    }

    #[test]
    fn controller_validation_catches_misuse() {
        let base = || {
            ProcessNetwork::builder()
                .dynamic("P1", CapacitiveLaw::linear(1.0))
                .terminal("T")
                .datum("D")
                .resistive("F1", "T", "P1", ResistiveLaw::linear(1.0))
                .controlled("F2", "P1", "D")
        };
        // missing controller for the controlled branch
        assert_eq!(
            base().build().unwrap_err(),
            NetworkError::UncontrolledBranch("F2".into())
        );
        // non-positive gain
        assert_eq!(
            base()
                .controller("P1", "F2", 0.0, 1.0, None)
                .build()
                .unwrap_err(),
            NetworkError::NonPositiveGain("P1".into())
        );
        // inverted bounds
        assert_eq!(
            base()
                .controller("P1", "F2", 1.0, 1.0, Some((2.0, 1.0)))
                .build()
                .unwrap_err(),
            NetworkError::BadBounds("P1".into())
        );
    }
}
