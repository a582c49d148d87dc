#pragma once

#include <stdexcept>
#include <string>

namespace anosov {

// Failure conditions carry a stable machine-readable code so the CLI can map
// them to exit codes and JSON error fields.
class AnosovError : public std::runtime_error {
public:
    AnosovError(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define ANOSOV_DEFINE_ERROR(Name)                             \
    class Name : public AnosovError {                         \
    public:                                                   \
        explicit Name(const std::string& what)                \
            : AnosovError(#Name, what) {}                     \
    }

ANOSOV_DEFINE_ERROR(ModelError);
ANOSOV_DEFINE_ERROR(NewtonDivergence);
ANOSOV_DEFINE_ERROR(DepthTooShallow);
ANOSOV_DEFINE_ERROR(CertificationFailed);
ANOSOV_DEFINE_ERROR(DegenerateMatrix);
ANOSOV_DEFINE_ERROR(CountMismatch);
ANOSOV_DEFINE_ERROR(ObstructionNonzero);
ANOSOV_DEFINE_ERROR(ResidualTooLarge);
ANOSOV_DEFINE_ERROR(LeafTraceFailure);
ANOSOV_DEFINE_ERROR(BranchMismatch);
ANOSOV_DEFINE_ERROR(PairSeparation);
ANOSOV_DEFINE_ERROR(AnchorMismatch);
ANOSOV_DEFINE_ERROR(NoConvergence);

#undef ANOSOV_DEFINE_ERROR

} // namespace anosov
