#include "cspread/bttb.hpp"
#include "cspread/fft2.hpp"

#include <cmath>

namespace cspread {

int next_pow2(int n) {
    int e = 1;
    while (e < n) e <<= 1;
    return e;
}

void BTTBMatrix::ensure_spectrum() const {
    if (!spectrum.empty()) return;
    E2 = next_pow2(2 * m - 1);
    E1 = next_pow2(2 * n - 1);
    std::vector<cplx> kernel(static_cast<std::size_t>(E2) * E1, cplx(0.0, 0.0));
    for (int p = -(m - 1); p <= m - 1; ++p) {
        int ip = ((p % E2) + E2) % E2;
        for (int q = -(n - 1); q <= n - 1; ++q) {
            int iq = ((q % E1) + E1) % E1;
            kernel[static_cast<std::size_t>(ip) * E1 + iq] = gen.at(p, q);
        }
    }
    spectrum.resize(kernel.size());
    fft2_forward(E2, E1, kernel.data(), spectrum.data());
}

std::vector<double> matvec(const BTTBMatrix& T, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != T.m * T.n)
        throw std::invalid_argument("bttb matvec: dimension mismatch");
    T.ensure_spectrum();
    const int E2 = T.E2, E1 = T.E1;
    std::size_t total = static_cast<std::size_t>(E2) * E1;
    std::vector<cplx> X(total, cplx(0.0, 0.0));
    for (int j = 0; j < T.m; ++j)
        for (int s = 0; s < T.n; ++s)
            X[static_cast<std::size_t>(j) * E1 + s] = x[static_cast<std::size_t>(j) * T.n + s];
    std::vector<cplx> FX(total);
    fft2_forward(E2, E1, X.data(), FX.data());
    for (std::size_t i = 0; i < total; ++i) FX[i] *= T.spectrum[i];
    fft2_backward(E2, E1, FX.data(), X.data());
    double scale = 1.0 / (static_cast<double>(E2) * E1);
    std::vector<double> y(static_cast<std::size_t>(T.m) * T.n);
    for (int i = 0; i < T.m; ++i)
        for (int r = 0; r < T.n; ++r)
            y[static_cast<std::size_t>(i) * T.n + r] =
                X[static_cast<std::size_t>(i) * E1 + r].real() * scale;
    return y;
}

std::vector<double> bttb_dense(const GeneratingArray& g) {
    int m = g.m, n = g.n;
    std::size_t N = static_cast<std::size_t>(m) * n;
    std::vector<double> A(N * N);
    for (int i = 0; i < m; ++i)
        for (int r = 0; r < n; ++r)
            for (int j = 0; j < m; ++j)
                for (int s = 0; s < n; ++s)
                    A[(static_cast<std::size_t>(i) * n + r) * N + (static_cast<std::size_t>(j) * n + s)] =
                        g.at(i - j, r - s);
    return A;
}

BCCBPreconditioner optimal_bccb(const BTTBMatrix& T) {
    const int m = T.m, n = T.n;
    // 2-level diagonal-averaging (Frobenius projection onto the BCCB algebra):
    // each level gets the optimal-circulant weights ((n-k) g_k + k g_{k-n}) / n.
    std::vector<cplx> c(static_cast<std::size_t>(m) * n, cplx(0.0, 0.0));
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < n; ++k) {
            double acc = (m - j) * (n - k) * T.gen.get(j, k)
                       + j * (n - k) * T.gen.get(j - m, k)
                       + (m - j) * k * T.gen.get(j, k - n)
                       + j * k * T.gen.get(j - m, k - n);
            c[static_cast<std::size_t>(j) * n + k] = acc / (static_cast<double>(m) * n);
        }
    BCCBPreconditioner P;
    P.m = m;
    P.n = n;
    P.eigen.resize(c.size());
    fft2_forward(m, n, c.data(), P.eigen.data());
    double amax = 0.0, amin = 0.0;
    for (std::size_t i = 0; i < P.eigen.size(); ++i) {
        double a = std::abs(P.eigen[i]);
        if (i == 0) amin = a;
        amax = std::max(amax, a);
        amin = std::min(amin, a);
    }
    if (amin <= 1e-13 * amax)
        throw std::runtime_error("optimal_bccb: singular preconditioner (zero eigenvalue)");
    return P;
}

namespace {

std::vector<double> bccb_fourier_op(const BCCBPreconditioner& P, const std::vector<double>& x,
                                    bool invert) {
    if (static_cast<int>(x.size()) != P.m * P.n)
        throw std::invalid_argument("bccb apply: dimension mismatch");
    std::size_t total = x.size();
    std::vector<cplx> X(total);
    for (std::size_t i = 0; i < total; ++i) X[i] = x[i];
    std::vector<cplx> FX(total);
    fft2_forward(P.m, P.n, X.data(), FX.data());
    for (std::size_t i = 0; i < total; ++i)
        FX[i] = invert ? FX[i] / P.eigen[i] : FX[i] * P.eigen[i];
    fft2_backward(P.m, P.n, FX.data(), X.data());
    double scale = 1.0 / static_cast<double>(total);
    std::vector<double> y(total);
    for (std::size_t i = 0; i < total; ++i) y[i] = X[i].real() * scale;
    return y;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

} // namespace

std::vector<double> apply_inverse(const BCCBPreconditioner& P, const std::vector<double>& x) {
    return bccb_fourier_op(P, x, true);
}

std::vector<double> bccb_apply(const BCCBPreconditioner& P, const std::vector<double>& x) {
    return bccb_fourier_op(P, x, false);
}

std::pair<std::vector<double>, SolverStats>
bicgstab(const LinOp& A, const BCCBPreconditioner* P, const std::vector<double>& b,
         double tol, int maxit, const std::vector<double>* x0) {
    const std::size_t N = b.size();
    SolverStats st;
    std::vector<double> x = x0 ? *x0 : std::vector<double>(N, 0.0);

    double bnorm = nrm2(b);
    if (bnorm == 0.0) {
        st.converged = true;
        return {std::vector<double>(N, 0.0), st};
    }

    auto prec = [&](const std::vector<double>& v) { return P ? apply_inverse(*P, v) : v; };

    std::vector<double> r = b;
    {
        std::vector<double> Ax = A(x);
        for (std::size_t i = 0; i < N; ++i) r[i] -= Ax[i];
    }
    if (nrm2(r) / bnorm <= tol) {
        st.converged = true;
        st.rel_residual = nrm2(r) / bnorm;
        return {x, st};
    }

    std::vector<double> rhat = r;
    std::vector<double> p(N, 0.0), v(N, 0.0), s(N), t(N);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    bool restarted = false;
    bool fresh = true; // p, v invalid, start the recurrence from r

    auto soft_restart = [&](bool perturb, int tag) {
        rhat = r;
        if (perturb) {
            // deterministic perturbation to escape an orthogonal shadow vector
            unsigned long long z = 0x9e3779b97f4a7c15ull * (tag + 1);
            for (std::size_t i = 0; i < N; ++i) {
                z ^= z >> 27;
                z *= 0x94d049bb133111ebull;
                double u = static_cast<double>(z >> 11) * (1.0 / 9007199254740992.0);
                rhat[i] *= 1.0 + 1e-8 * (u - 0.5);
            }
        }
        rho = alpha = omega = 1.0;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        fresh = true;
    };

    auto true_residual_ok = [&]() {
        std::vector<double> Ax = A(x);
        for (std::size_t i = 0; i < N; ++i) r[i] = b[i] - Ax[i];
        st.rel_residual = nrm2(r) / bnorm;
        return st.rel_residual <= tol;
    };

    for (int it = 1; it <= maxit; ++it) {
        double rho_new = dot(rhat, r);
        if (std::fabs(rho_new) < 1e-300) {
            if (!restarted) {
                restarted = true;
                soft_restart(true, it);
                rho_new = dot(rhat, r);
            }
            if (std::fabs(rho_new) < 1e-300) {
                st.breakdown = true;
                break;
            }
        }
        if (fresh) {
            p = r;
            fresh = false;
        } else {
            double beta = (rho_new / rho) * (alpha / omega);
            for (std::size_t i = 0; i < N; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        std::vector<double> phat = prec(p);
        v = A(phat);
        double denom = dot(rhat, v);
        if (std::fabs(denom) < 1e-300) {
            if (!restarted) {
                restarted = true;
                soft_restart(true, it);
                continue;
            }
            st.breakdown = true;
            break;
        }
        alpha = rho_new / denom;
        for (std::size_t i = 0; i < N; ++i) s[i] = r[i] - alpha * v[i];

        if (nrm2(s) / bnorm <= tol) {
            for (std::size_t i = 0; i < N; ++i) x[i] += alpha * phat[i];
            st.iterations = it - 0.5;
            if (true_residual_ok()) {
                st.converged = true;
                return {x, st};
            }
            soft_restart(false, it);
            rho = 1.0;
            continue;
        }

        std::vector<double> shat = prec(s);
        t = A(shat);
        double tt = dot(t, t);
        if (tt == 0.0) {
            st.breakdown = true;
            break;
        }
        omega = dot(t, s) / tt;
        for (std::size_t i = 0; i < N; ++i) {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        st.iterations = it;
        if (nrm2(r) / bnorm <= tol) {
            if (true_residual_ok()) {
                st.converged = true;
                return {x, st};
            }
            soft_restart(false, it);
            rho = 1.0;
            continue;
        }
        if (std::fabs(omega) < 1e-300) {
            if (!restarted) {
                restarted = true;
                soft_restart(true, it);
                continue;
            }
            st.breakdown = true;
            break;
        }
        rho = rho_new;
    }

    std::vector<double> Ax = A(x);
    double rn = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double d = b[i] - Ax[i];
        rn += d * d;
    }
    st.rel_residual = std::sqrt(rn) / bnorm;
    st.converged = st.rel_residual <= tol;
    return {x, st};
}

} // namespace cspread
