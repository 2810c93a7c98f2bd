"""The task runners behind the CLI.

Each runner consumes an ExperimentConfig and returns (ResultTable,
artifacts), where artifacts carries loss traces, plot-data columns, and
non-deterministic wall times (kept out of results.csv so reruns are byte
identical).
"""

import time

import numpy as np

from .. import autodiff as ad
from ..chebyshev import bound_precondition_holds, theorem_bound
from ..datagen import (
    SignalDistribution,
    calibrated,
    corrupt,
    gen_masked_signal,
    seed_streams,
)
from ..ftinit import ft_init
from ..networks import NetworkSpec, build, forward, param_count
from ..optim import LrSchedule
from ..pde import (
    EllipticProblem,
    apply_operator_node,
    dirichlet_reference_solve,
    gen_sine_data,
    high_contrast_a,
)
from ..stacks import DenoiseModel, EnergyModel, SineSolverModel, TransformModel
from ..complexreal import decode
from .metrics import fit_log_rate, operator_rel_errors, rel_l2
from .results import ResultTable
from .training import (
    WarmupSchedule,
    epoch_batches,
    evaluate_in_batches,
    mse_loss,
    train,
)

RUNNERS = {}


def runner(name):
    def deco(fn):
        RUNNERS[name] = fn
        return fn

    return deco


def _schedule(cfg) -> LrSchedule:
    return LrSchedule(cfg.lr_base, cfg.lr_decay, cfg.lr_interval)


def _ft_schedule(cfg):
    main = LrSchedule(cfg.lr_base_ft, cfg.lr_decay_ft, cfg.lr_interval_ft)
    if cfg.warmup_steps > 0:
        return WarmupSchedule(cfg.warmup_steps, cfg.warmup_lr, main)
    return main


def _run_schedule(cfg, init: str):
    """Gentle annealed schedule for transform-initialized runs, the
    standard one for random initializations."""
    return _ft_schedule(cfg) if init == "ft" else _schedule(cfg)


def _run_steps(cfg, init: str) -> int:
    steps = cfg.steps if init == "ft" else cfg.steps_rand
    return steps + (cfg.warmup_steps if init == "ft" else 0)


def _spec(cfg, variant: str) -> NetworkSpec:
    return NetworkSpec(
        variant, cfg.n, cfg.k, cfg.depth, cfg.cheb_order,
        cfg.n // 2**cfg.depth,
        switch_depth=cfg.switch_depth if variant == "bnet" else None,
    )


# ---------------------------------------------------------------------------
# Operator approximation before training


@runner("approx-ft")
def run_approx_ft(cfg):
    table = ResultTable(cfg.asdict())
    artifacts = {"traces": {}, "plots": {}, "timings": {}}
    depths = list(cfg.sweep_depths)
    eps_curves = {}
    for window in cfg.rate_windows:
        for order in sorted(set(cfg.rate_orders) | {cfg.cheb_order}):
            errs = {p: [] for p in ("eps_1", "eps_2", "eps_inf")}
            for depth in depths:
                spec = NetworkSpec(
                    "bnet2", cfg.n, window, depth, order, cfg.n // 2**depth
                )
                res = operator_rel_errors(ft_init(spec))
                for p in errs:
                    errs[p].append(res[p])
                if order == cfg.cheb_order and window == cfg.k:
                    for p in errs:
                        table.add(f"{p}_L{depth}", res[p])
                # theorem ceiling wherever the precondition holds
                if bound_precondition_holds(order, window, depth):
                    for p, pv in (("eps_1", 1), ("eps_2", 2), ("eps_inf", np.inf)):
                        bound = theorem_bound(order, window, depth, pv)
                        table.add(
                            f"bound_margin_{p}_r{order}_K{window}_L{depth}",
                            bound / res[p],
                        )
            for p in errs:
                rate = fit_log_rate(depths, errs[p])
                table.add(f"rate_{p[4:]}_r{order}_K{window}", rate)
            eps_curves[(order, window)] = errs["eps_2"]
    for (order, window), curve in eps_curves.items():
        artifacts["plots"][f"decay_r{order}_K{window}"] = {
            "L": np.array(depths, dtype=float),
            "eps_2": np.array(curve),
        }
    return table, artifacts


# ---------------------------------------------------------------------------
# Trained transform regression


def _transform_loss(model, nodes, batch):
    x, target = batch
    out = model.forward_nodes(nodes, ad.constant(x))
    re = ad.decode_component(out, "real")
    im = ad.decode_component(out, "imag")
    err = ad.add(
        ad.sum_axis(ad.square(ad.sub(re, ad.constant(target.real))), 1),
        ad.sum_axis(ad.square(ad.sub(im, ad.constant(target.imag))), 1),
    )
    return ad.mean_all(err)


def _transform_rel_err(model, x, target, batch=2048):
    pred = evaluate_in_batches(
        lambda xb: decode(model.predict(xb)), x, batch
    )
    return float(rel_l2(pred, target).mean())


def _ft_targets(x, k):
    return np.fft.fft(x, axis=1)[:, :k]


def _draw_signals(dist, k_out):
    def draw(rng, batch):
        _, sig = gen_masked_signal(dist, rng, batch)
        return sig, _ft_targets(sig, k_out)

    return draw


def _train_transform_net(cfg, variant, init, dist, rng_train, test, table,
                         artifacts, label, pset=None, steps=None):
    spec = _spec(cfg, variant)
    if pset is not None:
        model = TransformModel(pset)
    elif init == "ft":
        model = TransformModel(ft_init(spec))
    else:
        model = TransformModel(build(spec, "random", int(rng_train.integers(2**31))))
    x_test, t_test = test
    table.add(f"{label}_pretrain_rel_err", _transform_rel_err(model, x_test, t_test))
    draw = _draw_signals(dist, cfg.k)
    steps = steps or _run_steps(cfg, init)
    t0 = time.perf_counter()
    trace = train(
        model,
        lambda step: draw(rng_train, cfg.batch),
        _transform_loss,
        steps,
        _run_schedule(cfg, init),
    )
    artifacts["timings"][f"{label}_train_s"] = time.perf_counter() - t0
    artifacts["traces"][label] = trace
    t0 = time.perf_counter()
    err = _transform_rel_err(model, x_test, t_test)
    artifacts["timings"][f"{label}_eval_s"] = time.perf_counter() - t0
    table.add(f"{label}_test_rel_err", err)
    return model


@runner("train-ft")
def run_train_ft(cfg):
    table = ResultTable(cfg.asdict())
    artifacts = {"traces": {}, "plots": {}, "timings": {}}
    dist = calibrated(
        SignalDistribution(cfg.n, cfg.k_gen, cfg.g_center, cfg.g_width)
    )
    streams = seed_streams(cfg.seed, 6)
    _, x_test = gen_masked_signal(dist, streams[0], cfg.eval_size)
    test = (x_test, _ft_targets(x_test, cfg.k))
    for variant in ("bnet2", "cnn"):
        counts = param_count(_spec(cfg, variant))
        table.add(f"params_{variant}_complex", counts["weight_complex"] + counts["bias_complex"])
        table.add(f"params_{variant}_real", counts["total_real"])
    models = {}
    for i, (variant, init) in enumerate(
        [("bnet2", "ft"), ("bnet2", "rand"), ("cnn", "ft"), ("cnn", "rand")]
    ):
        label = f"{variant}_{init}"
        models[label] = _train_transform_net(
            cfg, variant, init, dist, streams[1 + i], test, table, artifacts, label
        )
    # warm start: dense net initialized from the trained sparse one
    from ..stacks import warm_start_cnn

    warm = warm_start_cnn(models["bnet2_ft"].pset)
    _train_transform_net(
        cfg, "cnn", "ft", dist, streams[5], test, table, artifacts,
        "cnn_warm", pset=warm, steps=cfg.steps,
    )
    return table, artifacts


@runner("transfer")
def run_transfer(cfg):
    table = ResultTable(cfg.asdict())
    artifacts = {"traces": {}, "plots": {}, "timings": {}}
    base = SignalDistribution(cfg.n, cfg.k_gen, 0.0, cfg.g_width)
    train_dists = {
        "low": calibrated(base),
        "high": calibrated(SignalDistribution(cfg.n, cfg.k_gen, 7.0, cfg.g_width)),
        "mix": calibrated(SignalDistribution(cfg.n, cfg.k_gen, 0.0, np.inf)),
    }
    centers = [round(0.2 * i, 1) for i in range(36)]  # 0, 0.2, ..., 7
    test_streams = seed_streams(cfg.seed, len(centers) + 1)
    tests = []
    for c, stream in zip(centers, test_streams):
        dist = calibrated(SignalDistribution(cfg.n, cfg.k_gen, c, cfg.g_width))
        x = gen_masked_signal(dist, stream, cfg.eval_size)[1]
        tests.append((x, _ft_targets(x, cfg.k)))
    mix_x = gen_masked_signal(train_dists["mix"], test_streams[-1], cfg.eval_size)[1]
    mix_test = (mix_x, _ft_targets(mix_x, cfg.k))

    # untrained transform-initialized reference
    ref = TransformModel(ft_init(_spec(cfg, "bnet2")))
    ref_curve = [_transform_rel_err(ref, x, t) for x, t in tests]
    artifacts["plots"]["reference_ft_untrained"] = {
        "g_center": np.array(centers),
        "rel_err": np.array(ref_curve),
    }
    table.add("reference_ft_untrained_mean", float(np.mean(ref_curve)))

    run_streams = seed_streams(cfg.seed + 1, cfg.repeats * 12)
    si = 0
    for set_name, dist in train_dists.items():
        draw = _draw_signals(dist, cfg.k)
        for variant in ("bnet2", "cnn"):
            for init in ("ft", "rand"):
                label = f"{set_name}_{variant}_{init}"
                curves = np.zeros((cfg.repeats, len(centers)))
                mix_errs = np.zeros(cfg.repeats)
                for rep in range(cfg.repeats):
                    rng = run_streams[si]
                    si += 1
                    spec = _spec(cfg, variant)
                    if init == "ft":
                        model = TransformModel(ft_init(spec))
                    else:
                        model = TransformModel(
                            build(spec, "random", int(rng.integers(2**31)))
                        )
                    train(model, lambda s: draw(rng, cfg.batch),
                          _transform_loss, _run_steps(cfg, init),
                          _run_schedule(cfg, init))
                    curves[rep] = [
                        _transform_rel_err(model, x, t) for x, t in tests
                    ]
                    mix_errs[rep] = _transform_rel_err(model, *mix_test)
                artifacts["plots"][f"transfer_{label}"] = {
                    "g_center": np.array(centers),
                    "mean": curves.mean(axis=0),
                    "std": curves.std(axis=0),
                }
                table.add(f"{label}_worst_mean", float(curves.mean(axis=0).max()))
                table.add(f"{label}_avg_std", float(curves.std(axis=0).mean()))
                table.add(
                    f"{label}_mix_mean", float(mix_errs.mean()), float(mix_errs.std())
                )
    return table, artifacts


# ---------------------------------------------------------------------------
# Laplace energy


def _scalar_mse(model, nodes, batch):
    x, target = batch
    pred = model.forward_nodes(nodes, ad.constant(x))
    return ad.mean_all(ad.square(ad.sub(pred, ad.constant(target))))


@runner("energy")
def run_energy(cfg):
    from ..pde import energy_ground_truth

    table = ResultTable(cfg.asdict())
    artifacts = {"traces": {}, "plots": {}, "timings": {}}
    dist = calibrated(
        SignalDistribution(cfg.n, cfg.k_gen, cfg.g_center, cfg.g_width)
    )
    streams = seed_streams(cfg.seed, 5)
    x_test = gen_masked_signal(dist, streams[0], cfg.eval_size)[1]
    x_test -= x_test.mean(axis=1, keepdims=True)
    e_test = np.atleast_1d(energy_ground_truth(x_test))

    def draw(rng, batch):
        x = gen_masked_signal(dist, rng, batch)[1]
        x -= x.mean(axis=1, keepdims=True)
        return x, np.atleast_1d(energy_ground_truth(x))

    for i, (variant, init) in enumerate(
        [("bnet2", "ft"), ("bnet2", "rand"), ("cnn", "ft"), ("cnn", "rand")]
    ):
        label = f"{variant}_{init}"
        rng = streams[1 + i]
        spec = _spec(cfg, variant)
        seed = int(rng.integers(2**31))
        model = EnergyModel.create(spec, "ft" if init == "ft" else "random", seed)
        table.add(f"params_{label}_real", sum(v.size for v in model.params.values()))

        def eval_err():
            pred = evaluate_in_batches(model.predict, x_test, 2048)
            return float(np.mean(np.abs(pred - e_test) / np.abs(e_test)))

        table.add(f"{label}_pretrain_rel_err", eval_err())
        trace = train(model, lambda s: draw(rng, cfg.batch), _scalar_mse,
                      _run_steps(cfg, init), _run_schedule(cfg, init))
        artifacts["traces"][label] = trace
        table.add(f"{label}_test_rel_err", eval_err())
    return table, artifacts


# ---------------------------------------------------------------------------
# Elliptic PDE solver stacks


def _pde_models(cfg, a_coeff, rng, nonlinearity=0.0):
    out = {}
    for variant in ("bnet2", "cnn"):
        for init in ("ft", "rand"):
            seed = int(rng.integers(2**31))
            out[f"{variant}_{init}"] = SineSolverModel.create(
                cfg.n, cfg.k_en, cfg.k_de, cfg.depth, cfg.cheb_order,
                variant, "ft" if init == "ft" else "random", a_coeff, seed,
                nonlinearity=nonlinearity,
            )
    return out


@runner("linear-pde")
def run_linear_pde(cfg):
    table = ResultTable(cfg.asdict())
    artifacts = {"traces": {}, "plots": {}, "timings": {}}
    a_coeff = high_contrast_a(cfg.n)
    streams = seed_streams(cfg.seed, 3)
    f_train = gen_sine_data(cfg.k_en, cfg.n, streams[0], cfg.train_size)
    f_test = gen_sine_data(cfg.k_en, cfg.n, streams[0], cfg.eval_size)
    u_train = np.stack([dirichlet_reference_solve(a_coeff, f) for f in f_train])
    u_test = np.stack([dirichlet_reference_solve(a_coeff, f) for f in f_test])

    def loss_fn(model, nodes, batch):
        x, u = batch
        return mse_loss(model.forward_nodes(nodes, ad.constant(x)), u)

    models = _pde_models(cfg, a_coeff, streams[1])
    for label, model in models.items():
        table.add(f"params_{label}_real", sum(v.size for v in model.params.values()))

        def errs():
            pred_tr = evaluate_in_batches(model.predict, f_train, 1024)
            pred_te = evaluate_in_batches(model.predict, f_test, 1024)
            return (
                float(rel_l2(pred_tr, u_train).mean()),
                float(rel_l2(pred_te, u_test).mean()),
            )

        pre_tr, pre_te = errs()
        table.add(f"{label}_pretrain_rel_err", pre_te)
        init = "ft" if label.endswith("_ft") else "rand"
        batch_fn = epoch_batches((f_train, u_train), cfg.batch, streams[2])
        trace = train(model, batch_fn, loss_fn, _run_steps(cfg, init),
                      _run_schedule(cfg, init))
        artifacts["traces"][label] = trace
        tr, te = errs()
        table.add(f"{label}_train_rel_err", tr)
        table.add(f"{label}_test_rel_err", te)
    return table, artifacts


@runner("nonlinear-pde")
def run_nonlinear_pde(cfg):
    from ..errors import TrainingDiverged

    table = ResultTable(cfg.asdict())
    artifacts = {"traces": {}, "plots": {}, "timings": {}}
    prob = EllipticProblem(cfg.n, 1.0, cfg.nonlinearity)
    streams = seed_streams(cfg.seed, 3)
    f_train = gen_sine_data(cfg.k_en, cfg.n, streams[0], cfg.train_size)
    f_test = gen_sine_data(cfg.k_en, cfg.n, streams[0], cfg.eval_size)

    def loss_fn(model, nodes, batch):
        (f,) = batch
        u = model.forward_nodes(nodes, ad.constant(f))
        resid = ad.sub(apply_operator_node(prob, u), ad.constant(f))
        return ad.mean_all(ad.sum_axis(ad.square(resid), 1))

    def solve_rel_err(model, f):
        u = evaluate_in_batches(model.predict, f, 1024)
        return float(rel_l2(prob.apply(u), f).mean())

    models = _pde_models(cfg, np.ones(cfg.n), streams[1], cfg.nonlinearity)
    for label, model in models.items():
        table.add(f"{label}_pretrain_rel_err", solve_rel_err(model, f_test))
        init = "ft" if label.endswith("_ft") else "rand"
        batch_fn = epoch_batches((f_train,), cfg.batch, streams[2])
        try:
            trace = train(model, batch_fn, loss_fn, _run_steps(cfg, init),
                          _run_schedule(cfg, init))
            artifacts["traces"][label] = trace
            table.add(f"{label}_diverged", 0.0)
        except TrainingDiverged as exc:
            artifacts["traces"][label] = exc.trace
            table.add(f"{label}_diverged", 1.0)
        table.add(f"{label}_test_rel_err", solve_rel_err(model, f_test))
    return table, artifacts


# ---------------------------------------------------------------------------
# Signal restoration


def _restoration(cfg, mode):
    table = ResultTable(cfg.asdict())
    artifacts = {"traces": {}, "plots": {}, "timings": {}}
    dist = calibrated(
        SignalDistribution(cfg.n, cfg.k_gen, cfg.g_center, cfg.g_width)
    )
    streams = seed_streams(cfg.seed, 6)
    clean_test = gen_masked_signal(dist, streams[0], cfg.eval_size)[1]
    corrupted_test = corrupt(
        clean_test, mode, streams[0],
        noise_sigma=cfg.noise_sigma, blur_sigma=cfg.blur_sigma,
    )
    table.add(
        "corruption_rel_err", float(rel_l2(corrupted_test, clean_test).mean())
    )

    def draw(rng, batch):
        clean = gen_masked_signal(dist, rng, batch)[1]
        return (
            corrupt(clean, mode, rng, noise_sigma=cfg.noise_sigma,
                    blur_sigma=cfg.blur_sigma),
            clean,
        )

    def loss_fn(model, nodes, batch):
        x, clean = batch
        return mse_loss(model.forward_nodes(nodes, ad.constant(x)), clean)

    for i, (variant, init) in enumerate(
        [("bnet2", "ft"), ("bnet2", "rand"), ("cnn", "ft"), ("cnn", "rand")]
    ):
        label = f"{variant}_{init}"
        rng = streams[1 + i]
        model = DenoiseModel.create(
            cfg.n, cfg.k, cfg.depth, cfg.cheb_order, variant,
            "ft" if init == "ft" else "rand", int(rng.integers(2**31)),
        )
        table.add(f"params_{label}_real", sum(v.size for v in model.params.values()))

        def eval_err():
            pred = evaluate_in_batches(model.predict, corrupted_test, 1024)
            return float(rel_l2(pred, clean_test).mean())

        table.add(f"{label}_pretrain_rel_err", eval_err())
        trace = train(model, lambda s: draw(rng, cfg.batch), loss_fn,
                      _run_steps(cfg, init), _run_schedule(cfg, init))
        artifacts["traces"][label] = trace
        table.add(f"{label}_test_rel_err", eval_err())
    return table, artifacts


@runner("denoise")
def run_denoise(cfg):
    return _restoration(cfg, "noise")


@runner("deblur")
def run_deblur(cfg):
    return _restoration(cfg, "blur")


# ---------------------------------------------------------------------------
# Switch-layer variant comparison


@runner("bnet-vs-bnet2")
def run_bnet_comparison(cfg):
    table = ResultTable(cfg.asdict())
    artifacts = {"traces": {}, "plots": {}, "timings": {}}
    dist = calibrated(
        SignalDistribution(cfg.n, cfg.k_gen, cfg.g_center, cfg.g_width)
    )
    streams = seed_streams(cfg.seed, 5)
    x_test = gen_masked_signal(dist, streams[0], cfg.eval_size)[1]
    test = (x_test, _ft_targets(x_test, cfg.k))
    for i, (variant, init) in enumerate(
        [("bnet2", "ft"), ("bnet2", "rand"), ("bnet", "ft"), ("bnet", "rand")]
    ):
        label = f"{variant}_{init}"
        counts = param_count(_spec(cfg, variant))
        table.add(f"params_{label}_complex",
                  counts["weight_complex"] + counts["bias_complex"])
        table.add(f"params_{label}_real", counts["total_real"])
        model = _train_transform_net(
            cfg, variant, init, dist, streams[1 + i], test, table, artifacts, label
        )
        t0 = time.perf_counter()
        forward(model.pset, x_test[: min(1024, len(x_test))])
        artifacts["timings"][f"{label}_forward_s"] = time.perf_counter() - t0
    return table, artifacts
