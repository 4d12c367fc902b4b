#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace jp {

/**
 * Exact count of oracle evaluations — the artifact's measure of query
 * complexity. Atomic so concurrent evaluation is safe; monotone except for
 * explicit reset().
 */
class QueryLedger {
public:
    QueryLedger() : count_(0) {}

    std::uint64_t total() const { return count_.load(std::memory_order_relaxed); }
    void bump() { count_.fetch_add(1, std::memory_order_relaxed); }
    void reset() { count_.store(0, std::memory_order_relaxed); }

private:
    std::atomic<std::uint64_t> count_;
};

/**
 * Black-box evaluator x in R^n -> value in [-1,1]. All algorithms see test
 * subjects only through this interface; every evaluate() call increments the
 * ledger by exactly one.
 *
 * Oracles are immutable after construction; the evaluation closure must be
 * deterministic (same point -> same value).
 */
class FunctionOracle {
public:
    using EvalFn = std::function<double(std::span<const double>)>;

    FunctionOracle(std::size_t dimension, EvalFn fn)
        : n_(dimension),
          fn_(std::move(fn)),
          ledger_(std::make_shared<QueryLedger>()) {
        if (n_ == 0) throw std::invalid_argument("FunctionOracle: dimension must be positive");
        if (!fn_) throw std::invalid_argument("FunctionOracle: empty evaluator");
    }

    /// Wrap-for-composition: share an existing ledger so a composed tester
    /// reports a single total.
    FunctionOracle(std::size_t dimension, EvalFn fn, std::shared_ptr<QueryLedger> ledger)
        : n_(dimension), fn_(std::move(fn)), ledger_(std::move(ledger)) {
        if (n_ == 0) throw std::invalid_argument("FunctionOracle: dimension must be positive");
        if (!fn_) throw std::invalid_argument("FunctionOracle: empty evaluator");
        if (!ledger_) throw std::invalid_argument("FunctionOracle: null ledger");
    }

    std::size_t dimension() const { return n_; }

    double evaluate(std::span<const double> x) const {
        ledger_->bump();
        return fn_(x);
    }

    double evaluate(const std::vector<double>& x) const {
        return evaluate(std::span<const double>(x.data(), x.size()));
    }

    const std::shared_ptr<QueryLedger>& ledger() const { return ledger_; }

    /// Same function, counting into a caller-supplied ledger.
    FunctionOracle with_ledger(std::shared_ptr<QueryLedger> ledger) const {
        return FunctionOracle(n_, fn_, std::move(ledger));
    }

private:
    std::size_t n_;
    EvalFn fn_;
    std::shared_ptr<QueryLedger> ledger_;
};

/// sign with the tie rule fixed project-wide: sign(0) = +1.
inline double sign_pm1(double v) { return v < 0.0 ? -1.0 : 1.0; }

}  // namespace jp
