#pragma once

#include <stdexcept>
#include <string>

namespace qsbs {

enum class Kind { Normal, ContaminatedNormal, Slash, StudentT };

/// Mixing law of the normal-variance mixture kernel. The variance inflation
/// factor is 1/U, where U follows the family's mixing distribution:
///   Normal             U == 1
///   ContaminatedNormal U in {delta, 1} with probabilities {nu, 1 - nu}
///   Slash              U ~ Beta(nu, 1)
///   StudentT           U ~ Gamma(nu/2, rate nu/2)
struct MixtureFamily {
    Kind kind = Kind::Normal;
    double nu = 0.0;
    double delta = 0.0;  // contaminated normal only

    static MixtureFamily normal() { return {Kind::Normal, 0.0, 0.0}; }
    static MixtureFamily contaminated_normal(double nu, double delta) {
        MixtureFamily f{Kind::ContaminatedNormal, nu, delta};
        f.validate();
        return f;
    }
    static MixtureFamily slash(double nu) {
        MixtureFamily f{Kind::Slash, nu, 0.0};
        f.validate();
        return f;
    }
    static MixtureFamily student_t(double nu) {
        MixtureFamily f{Kind::StudentT, nu, 0.0};
        f.validate();
        return f;
    }

    void validate() const {
        switch (kind) {
            case Kind::Normal:
                break;
            case Kind::ContaminatedNormal:
                if (!(nu > 0.0 && nu < 1.0))
                    throw std::invalid_argument("contaminated normal: nu must lie in (0,1)");
                if (!(delta > 0.0 && delta < 1.0))
                    throw std::invalid_argument("contaminated normal: delta must lie in (0,1)");
                break;
            case Kind::Slash:
            case Kind::StudentT:
                if (!(nu > 0.0))
                    throw std::invalid_argument("slash/student-t: nu must be positive");
                break;
        }
    }

    std::string name() const {
        switch (kind) {
            case Kind::Normal: return "normal";
            case Kind::ContaminatedNormal: return "cn";
            case Kind::Slash: return "slash";
            case Kind::StudentT: return "t";
        }
        return "?";
    }

    bool operator==(const MixtureFamily&) const = default;
};

}  // namespace qsbs
