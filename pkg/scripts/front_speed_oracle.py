"""Independent 1D measurement of the bistable front speed.

Time-marches  u_t = u_xx + lam*u*(1-u)*(mu+u)  on a long interval with a
second-order finite-difference Laplacian and semi-implicit Euler, tracks the
level-set position of the front, and compares the measured speed with the
closed form  sqrt(lam/2)*(1-mu).

Run:  python3 scripts/front_speed_oracle.py
"""

import numpy as np


def front_speed(lam, mu, L=120.0, n=4800, dt=0.02, t_settle=30.0, t_meas=60.0):
    x = np.linspace(-L, L, n)
    h = x[1] - x[0]
    u = -mu + (1 + mu) * 0.5 * (1 + np.tanh(x / 2.0))

    # semi-implicit: (I - dt*D2) u+ = u + dt*f(u)
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla
    main = -2.0 * np.ones(n)
    main[0] = main[-1] = -1.0          # zero-flux ends
    D2 = sp.diags([np.ones(n - 1), main, np.ones(n - 1)], [-1, 0, 1]) / h**2
    A = (sp.identity(n) - dt * D2).tocsc()
    lu = spla.splu(A)

    level = (1.0 - mu) / 2.0

    def front_pos(u):
        i = np.argmax(u > level)
        # linear interpolation of the level crossing
        u0, u1 = u[i - 1], u[i]
        return x[i - 1] + (level - u0) / (u1 - u0) * h

    t, pos0 = 0.0, None
    nsteps = int((t_settle + t_meas) / dt)
    for k in range(nsteps):
        f = lam * u * (1 - u) * (mu + u)
        u = lu.solve(u + dt * f)
        t += dt
        if pos0 is None and t >= t_settle:
            pos0, t0 = front_pos(u), t
    return (front_pos(u) - pos0) / (t - t0)


if __name__ == "__main__":
    lam = 1.0
    print(f"lam={lam}: speed of the front u(-inf)=-mu -> u(+inf)=1")
    print(f"{'mu':>6} {'measured':>12} {'sqrt(lam/2)(1-mu)':>20} {'rel err':>10}")
    for mu in (1.0, 0.9, 0.8, 0.7, 0.6):
        c = front_speed(lam, mu)
        ref = np.sqrt(lam / 2.0) * (1.0 - mu)
        err = abs(abs(c) - ref) / ref if ref else abs(c)
        print(f"{mu:6.2f} {c:12.6f} {ref:20.6f} {err:10.2e}")
