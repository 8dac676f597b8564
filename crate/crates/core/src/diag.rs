//! Diagnostics shared by parsing, validation and graph checks.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Stable machine-readable diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Code {
    // document level
    Syntax,
    MissingField,
    TypeMismatch,
    InvalidValue,
    UnknownMode,
    TopologySyntax,
    UnsupportedVersion,
    BdcOnDcc,
    SscPsdReceiver,
    // design structure
    DuplicateName,
    UnknownKernel,
    UnusedKernel,
    KernelCascadePorts,
    TopologyArity,
    ParallelDepth,
    CascadeNotLinear,
    EmptyPu,
    SelectorOutOfRange,
    SelectorEmpty,
    SelectorDuplicate,
    SelectorNoPort,
    PortUncovered,
    PortMultiCovered,
    DirMultiCore,
    DcaKernelMissing,
    DcaKernelUnexpected,
    ReuseFactorMismatch,
    PlioSplitUneven,
    PstChainArity,
    ThrFanout,
    TpcThrBuffer,
    AmcRequired,
    PhdBuffer,
    DuBuffer,
    PairingUnresolved,
    PuUnpaired,
    PuMultiPaired,
    DuUnpaired,
    PacketFanout,
    // budgets
    AieCores,
    PlioIn,
    PlioOut,
    UramBytes,
    KernelMemExceeded,
    // graph IR
    DuplicateNode,
    UnknownNode,
    PortOutOfRange,
    UndrivenPort,
    MultiDrivenPort,
    UnconsumedPort,
    EmptyEdge,
    TagMismatch,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::Syntax => "SYNTAX",
            Code::MissingField => "MISSING_FIELD",
            Code::TypeMismatch => "TYPE_MISMATCH",
            Code::InvalidValue => "INVALID_VALUE",
            Code::UnknownMode => "UNKNOWN_MODE",
            Code::TopologySyntax => "TOPOLOGY_SYNTAX",
            Code::UnsupportedVersion => "UNSUPPORTED_VERSION",
            Code::BdcOnDcc => "BDC_ON_DCC",
            Code::SscPsdReceiver => "SSC_PSD_RECEIVER",
            Code::DuplicateName => "DUPLICATE_NAME",
            Code::UnknownKernel => "UNKNOWN_KERNEL",
            Code::UnusedKernel => "UNUSED_KERNEL",
            Code::KernelCascadePorts => "KERNEL_CASCADE_PORTS",
            Code::TopologyArity => "TOPOLOGY_ARITY",
            Code::ParallelDepth => "PARALLEL_DEPTH",
            Code::CascadeNotLinear => "CASCADE_NOT_LINEAR",
            Code::EmptyPu => "EMPTY_PU",
            Code::SelectorOutOfRange => "SELECTOR_OUT_OF_RANGE",
            Code::SelectorEmpty => "SELECTOR_EMPTY",
            Code::SelectorDuplicate => "SELECTOR_DUPLICATE",
            Code::SelectorNoPort => "SELECTOR_NO_PORT",
            Code::PortUncovered => "PORT_UNCOVERED",
            Code::PortMultiCovered => "PORT_MULTI_COVERED",
            Code::DirMultiCore => "DIR_MULTI_CORE",
            Code::DcaKernelMissing => "DCA_KERNEL_MISSING",
            Code::DcaKernelUnexpected => "DCA_KERNEL_UNEXPECTED",
            Code::ReuseFactorMismatch => "REUSE_FACTOR_MISMATCH",
            Code::PlioSplitUneven => "PLIO_SPLIT_UNEVEN",
            Code::PstChainArity => "PST_CHAIN_ARITY",
            Code::ThrFanout => "THR_FANOUT",
            Code::TpcThrBuffer => "TPC_THR_BUFFER",
            Code::AmcRequired => "AMC_REQUIRED",
            Code::PhdBuffer => "PHD_BUFFER",
            Code::DuBuffer => "DU_BUFFER",
            Code::PairingUnresolved => "PAIRING_UNRESOLVED",
            Code::PuUnpaired => "PU_UNPAIRED",
            Code::PuMultiPaired => "PU_MULTI_PAIRED",
            Code::DuUnpaired => "DU_UNPAIRED",
            Code::PacketFanout => "PACKET_FANOUT",
            Code::AieCores => "AIE_CORES",
            Code::PlioIn => "PLIO_IN",
            Code::PlioOut => "PLIO_OUT",
            Code::UramBytes => "URAM_BYTES",
            Code::KernelMemExceeded => "KERNEL_MEM_EXCEEDED",
            Code::DuplicateNode => "DUPLICATE_NODE",
            Code::UnknownNode => "UNKNOWN_NODE",
            Code::PortOutOfRange => "PORT_OUT_OF_RANGE",
            Code::UndrivenPort => "UNDRIVEN_PORT",
            Code::MultiDrivenPort => "MULTI_DRIVEN_PORT",
            Code::UnconsumedPort => "UNCONSUMED_PORT",
            Code::EmptyEdge => "EMPTY_EDGE",
            Code::TagMismatch => "TAG_MISMATCH",
        }
    }

    /// Codes that describe malformed documents rather than rule violations.
    pub fn is_schema_level(self) -> bool {
        matches!(
            self,
            Code::Syntax
                | Code::MissingField
                | Code::TypeMismatch
                | Code::InvalidValue
                | Code::UnknownMode
                | Code::TopologySyntax
                | Code::UnsupportedVersion
        )
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    /// Dotted document path, e.g. `pus[2].psts[0].dacs[1]`.
    pub location: String,
}

impl Diagnostic {
    pub fn error(code: Code, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            location: location.into(),
        }
    }

    pub fn warning(code: Code, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            location: location.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        if self.location.is_empty() {
            write!(f, "{sev} {}: {}", self.code, self.message)
        } else {
            write!(f, "{sev} {} at {}: {}", self.code, self.location, self.message)
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
