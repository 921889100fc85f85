"""Plain Armijo gradient-descent reference used to validate the alpha = 0 path.

Reimplements the iteration directly from the monotone acceptance rule
f(R(t Z)) <= f(X) + beta t g(grad, Z). It shares the gradient and retraction
kernels with the solver so that its accept/reject decisions are comparable
bitwise, but owns its entire control flow.
"""

import numpy as np

from sympstiefel.manifold import SymplecticStiefel
from sympstiefel.retraction import CayleyGradientStep, DomainError
from sympstiefel.solver import trial_step


def reference_armijo_run(problem, x0, metric, ls, stop):
    """Run monotone-Armijo descent; returns (k, t, h, f_trial) per accepted step."""
    man = SymplecticStiefel(problem.n, problem.p)
    X = np.array(x0, copy=True)
    f = float(problem.f(X))
    gr = man.riemannian_gradient(X, problem.egrad(X), metric)
    gamma = ls.clamp(f)
    decisions = []
    f_prev = None
    X_prev = grad_prev = None
    for k in range(stop.max_iter):
        if float(np.linalg.norm(gr.grad)) <= stop.eps_grad:
            break
        inner_gd = -man.inner(X, metric, gr.grad, gr.grad)
        if k >= 1:
            gamma = trial_step(X - X_prev, gr.grad - grad_prev, k, ls.step_rule, ls,
                               f_curr=f, f_prev=f_prev, dir_deriv=inner_gd)
        step = CayleyGradientStep(man, X, gr.p_f, gr.e_rho)
        h, t = 0, gamma
        while True:
            try:
                X_trial = step.at(t)
                f_trial = float(problem.f(X_trial))
                ok = f_trial <= f + ls.beta * t * inner_gd
            except DomainError:
                ok = False
            if ok:
                break
            h += 1
            t = gamma * ls.delta**h
            assert h <= ls.max_backtracks
        decisions.append((k, t, h, f_trial))
        X_prev, grad_prev, f_prev = X, gr.grad, f
        X, f = X_trial, f_trial
        gr = man.riemannian_gradient(X, problem.egrad(X), metric)
        if (np.linalg.norm(X - X_prev) / np.sqrt(2 * problem.n) < stop.eps_x
                and abs(f_prev - f) / (abs(f_prev) + 1.0) < stop.eps_f):
            break
    return decisions
