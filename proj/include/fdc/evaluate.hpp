#pragma once

#include "fdc/expression.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fdc {

enum class EvalMode { automatic, naive, moebius };

struct EvaluationContext {
    const Eigen::MatrixXd* A = nullptr;
    EvalMode mode = EvalMode::automatic;
};

/**
 * Numeric values of diagram characters on one fixed matrix.
 * Repeated-label values are cached per isomorphism class, and tree
 * messages per subtree shape, so many related diagrams share work.
 */
class Evaluator {
public:
    explicit Evaluator(const Eigen::MatrixXd& A, EvalMode mode = EvalMode::automatic);

    int n() const { return n_; }
    EvalMode mode() const { return mode_; }

    // Full vector for vector expressions.
    Eigen::VectorXd vector(const DiagramExpression& e);
    // Entries at the given coordinates only.
    Eigen::VectorXd vector_at(const DiagramExpression& e, const std::vector<int>& roots);
    double scalar(const DiagramExpression& e);

    Eigen::VectorXd injective(const DiagramRef& d);
    Eigen::VectorXd injective_at(const DiagramRef& d, const std::vector<int>& roots);
    double injective_scalar(const DiagramRef& d);

    Eigen::VectorXd repeated(const DiagramRef& d);
    Eigen::VectorXd repeated_at(const DiagramRef& d, const std::vector<int>& roots);
    double repeated_scalar(const DiagramRef& d);

    // Entry weight of a cell: a^p (a^2 - 1/n)^q.
    double weight(int p, int q, double a) const;

private:
    bool use_naive() const;
    Eigen::VectorXd naive_injective(const CanonicalDiagram& d, const std::vector<int>& roots);
    double naive_injective_scalar(const CanonicalDiagram& d);

    const Eigen::MatrixXd& power(int p, int q);
    Eigen::VectorXd diag_power(int p, int q) const;
    Eigen::VectorXd forest_message(const CellMatrix& g, int v, int parent, const std::string& code);
    Eigen::VectorXd forest_root_vector(const CanonicalDiagram& d);
    double forest_scalar(const CanonicalDiagram& d);
    double forest_component(const CellMatrix& g, const std::vector<int>& comp);

    struct Elim;
    Eigen::VectorXd eliminate_all(const CanonicalDiagram& d);
    double eliminate_fixed(const CanonicalDiagram& d, int root_value);
    double eliminate_scalar(const CanonicalDiagram& d);
    bool fixed_root_is_cheap(const CanonicalDiagram& d) const;

    const Eigen::MatrixXd& A_;
    int n_;
    EvalMode mode_;
    std::map<std::pair<int, int>, std::unique_ptr<Eigen::MatrixXd>> powers_;
    std::map<std::string, Eigen::VectorXd> message_memo_;
    std::map<std::string, Eigen::VectorXd> tilde_memo_;
    std::map<std::string, double> scalar_memo_;
};

struct Evaluation {
    bool is_scalar = false;
    Eigen::VectorXd vector;
    double scalar = 0.0;
};

Evaluation evaluate(const DiagramExpression& e, const EvaluationContext& ctx);

}  // namespace fdc
