#include "qpwalk/frequency.hpp"

#include <sstream>

namespace qpwalk {

double to_double(const BigRat& r) { return r.convert_to<double>(); }

BigRat mod1(const BigRat& r) {
    BigInt num = boost::multiprecision::numerator(r);
    BigInt den = boost::multiprecision::denominator(r);
    BigInt m = num % den;
    if (m < 0) m += den;
    return BigRat(m, den);
}

namespace {

std::vector<BigInt> parse_int_list(const std::string& s) {
    std::vector<BigInt> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.emplace_back(item);
    return out;
}

} // namespace

Frequency Frequency::from_quotients(std::vector<BigInt> quotients) {
    if (quotients.empty()) throw Error("empty partial-quotient list");
    for (const BigInt& a : quotients)
        if (a < 1) throw Error("partial quotients must be >= 1");

    Frequency f;
    f.quotients_ = std::move(quotients);
    // standard recursion with a_0 = 0: p: 0,1,...; q: 1,a1,...
    BigInt p_prev2 = 0, p_prev1 = 1; // p_0 = 0 handled below
    BigInt q_prev2 = 1, q_prev1 = 0;
    // h_{-1}=1, h_{-2}=0, k_{-1}=0, k_{-2}=1; a_0 = 0 step:
    BigInt p0 = 0, q0 = 1;
    std::vector<BigInt> ps{p0}, qs{q0};
    p_prev2 = 1; p_prev1 = p0; // h_{-1}, h_0
    q_prev2 = 0; q_prev1 = q0; // k_{-1}, k_0
    for (const BigInt& a : f.quotients_) {
        BigInt p = a * p_prev1 + p_prev2;
        BigInt q = a * q_prev1 + q_prev2;
        ps.push_back(p);
        qs.push_back(q);
        p_prev2 = p_prev1; p_prev1 = p;
        q_prev2 = q_prev1; q_prev1 = q;
    }
    // index 0 is the last convergent with denominator 1 (drops 0/1 when a1 = 1)
    size_t start = 0;
    while (start + 1 < qs.size() && qs[start + 1] == 1) ++start;
    f.conv_p_.assign(ps.begin() + start, ps.end());
    f.conv_q_.assign(qs.begin() + start, qs.end());
    if (f.conv_p_.size() < 3)
        throw Error("need at least depth 2 (build with more quotients)");
    return f;
}

Frequency Frequency::golden(int depth) {
    return from_quotients(std::vector<BigInt>(depth, 1));
}

Frequency Frequency::silver(int depth) {
    return from_quotients(std::vector<BigInt>(depth, 2));
}

Frequency Frequency::liouville(const std::vector<unsigned>& exponents,
                               unsigned bit_budget) {
    if (exponents.empty()) throw Error("empty exponent schedule");
    for (unsigned s : exponents)
        if (s < 1) throw Error("schedule exponents must be >= 1");

    // grow quotients so that eta_n < q_n^{-sigma(n)} for n = 1..len(schedule)
    std::vector<BigInt> quots{2}; // a_1 (q_1 = 2)
    BigInt q_prev = 1, q_cur = 2;
    for (unsigned sigma : exponents) {
        // q_{n+1} = a q_n + q_{n-1} > q_n^{sigma}  =>  eta_n < 1/q_{n+1} < q_n^{-sigma}
        BigInt target = boost::multiprecision::pow(
            q_cur, static_cast<unsigned>(sigma));
        BigInt a = target / q_cur + 1;
        quots.push_back(a);
        BigInt q_next = a * q_cur + q_prev;
        if (boost::multiprecision::msb(q_next) + 1 > bit_budget)
            throw Error("liouville schedule infeasible within bit budget");
        q_prev = q_cur;
        q_cur = q_next;
    }
    // guard quotients so eta is exact at the last scheduled index
    quots.push_back(2);
    quots.push_back(2);
    Frequency f = from_quotients(std::move(quots));

    // exact verification, recorded
    for (size_t n = 1; n <= exponents.size(); ++n) {
        BigRat lhs = f.eta(static_cast<int>(n));
        BigRat rhs(BigInt(1), boost::multiprecision::pow(
                                  f.q(static_cast<int>(n)),
                                  static_cast<unsigned>(exponents[n - 1])));
        std::ostringstream os;
        os << "eta_" << n << " < q_" << n << "^-" << exponents[n - 1] << ": "
           << (lhs < rhs ? "verified" : "FAILED");
        f.notes_.push_back(os.str());
        if (lhs >= rhs) throw Error("liouville schedule inequality failed: " + os.str());
    }
    return f;
}

Frequency Frequency::parse(const std::string& spec) {
    auto split_head = [&](const std::string& prefix) {
        return spec.substr(prefix.size());
    };
    if (spec == "golden") return golden();
    if (spec == "silver") return silver();
    if (spec.rfind("golden:", 0) == 0) return golden(std::stoi(split_head("golden:")));
    if (spec.rfind("silver:", 0) == 0) return silver(std::stoi(split_head("silver:")));
    if (spec.rfind("quotients:", 0) == 0)
        return from_quotients(parse_int_list(split_head("quotients:")));
    if (spec.rfind("liouville:", 0) == 0) {
        std::vector<unsigned> exps;
        for (const BigInt& v : parse_int_list(split_head("liouville:")))
            exps.push_back(v.convert_to<unsigned>());
        return liouville(exps);
    }
    throw Error("cannot parse frequency spec: " + spec);
}

const BigInt& Frequency::p(int n) const {
    if (n < 0 || n > depth()) throw Error("convergent depth exceeded");
    return conv_p_[static_cast<size_t>(n)];
}

const BigInt& Frequency::q(int n) const {
    if (n < 0 || n > depth()) throw Error("convergent depth exceeded");
    return conv_q_[static_cast<size_t>(n)];
}

BigRat Frequency::eta(int n) const {
    if (n < 0 || n >= depth()) throw Error("eta needs a deeper convergent");
    BigInt num = q(n) * p(depth()) - p(n) * q(depth());
    if (num < 0) num = -num;
    return BigRat(num, q(depth()));
}

int Frequency::eta_sign(int n) const {
    if (n < 0 || n >= depth()) throw Error("eta needs a deeper convergent");
    BigInt num = q(n) * p(depth()) - p(n) * q(depth());
    return num > 0 ? 1 : (num < 0 ? -1 : 0);
}

Frequency::Convergent Frequency::convergent(int n) const {
    return {p(n), q(n), eta(n), eta_sign(n)};
}

BigRat Frequency::surrogate() const {
    return BigRat(p(depth()), q(depth()));
}

double Frequency::value() const { return to_double(surrogate()); }

Frequency::OrbitPoint Frequency::orbit_point(const BigRat& x, long long j,
                                             int d) const {
    if (d < 0) d = depth();
    if (d > depth()) throw Error("convergent depth exceeded");
    BigRat pos = mod1(x + BigRat(BigInt(j) * p(d), q(d)));
    double err = 0.0;
    if (d < depth()) {
        BigRat bound = eta(d) * BigInt(j < 0 ? -j : j);
        err = to_double(bound);
    }
    return {pos, err};
}

Frequency::OrbitPoint Frequency::orbit_point_checked(const BigRat& x, long long j,
                                                     double max_err, int d) const {
    OrbitPoint op = orbit_point(x, j, d);
    if (op.err_bound > max_err)
        throw PrecisionError("orbit substitution error " + std::to_string(op.err_bound) +
                             " exceeds budget; deepen the convergent");
    return op;
}

nlohmann::json Frequency::to_json() const {
    nlohmann::json quots = nlohmann::json::array();
    for (const BigInt& a : quotients_) quots.push_back(a.str());
    return {{"quotients", quots}};
}

Frequency Frequency::from_json(const nlohmann::json& j) {
    std::vector<BigInt> quots;
    for (const auto& v : j.at("quotients")) quots.emplace_back(v.get<std::string>());
    return from_quotients(std::move(quots));
}

} // namespace qpwalk
