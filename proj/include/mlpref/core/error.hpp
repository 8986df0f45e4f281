#pragma once
#include <stdexcept>
#include <string>

namespace mlpref {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// core
struct InvalidScore : Error { using Error::Error; };
struct MissingGroundTruth : Error { using Error::Error; };
struct TaskMismatch : Error { using Error::Error; };
struct InvalidRecord : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

// llm gateway
struct TransportError : Error {
    TransportError(const std::string& msg, bool transient_failure = true)
        : Error(msg), transient(transient_failure) {}
    bool transient;
};
struct FixtureMiss : Error { using Error::Error; };
struct InvalidRequest : Error { using Error::Error; };

// judge
struct UnparseableJudgment : Error { using Error::Error; };
struct JudgeUnavailable : Error { using Error::Error; };

// data reports
struct LeakageRejected : Error { using Error::Error; };
struct ScriptInvalid : Error { using Error::Error; };
struct ProfilingTimeout : Error { using Error::Error; };
struct ProfilingFailed : Error { using Error::Error; };
struct ReportMalformed : Error { using Error::Error; };

// sandbox
struct SandboxError : Error { using Error::Error; };
struct ExtractionError : Error { using Error::Error; };

// complexity
struct MissingComplexity : Error { using Error::Error; };
struct ComplexityUnavailable : Error { using Error::Error; };

// metrics
struct RankMismatch : Error { using Error::Error; };

// agent
struct GenerationFailed : Error { using Error::Error; };
struct RoundAborted : Error { using Error::Error; };
struct AgentFailed : Error { using Error::Error; };
struct JournalCorrupt : Error { using Error::Error; };

// config / cli
struct ConfigError : Error { using Error::Error; };

}  // namespace mlpref
