from collections import namedtuple
from fractions import Fraction
from tube_incidence_lab.constants import DEFAULT_RETRIES
from tube_incidence_lab.constants import DEFAULT_THICKNESS
from tube_incidence_lab.constants import FamilyKind
from tube_incidence_lab.constants import Subcommand
from tube_incidence_lab.constructions import area_saturation
from tube_incidence_lab.constructions import bush_example
from tube_incidence_lab.constructions import train_track
from tube_incidence_lab.energy_fourier import CANTOR
from tube_incidence_lab.energy_fourier import cantor_measure
from tube_incidence_lab.energy_fourier import energy3
from tube_incidence_lab.energy_fourier import exponent_fit
from tube_incidence_lab.energy_fourier import mu_hat_moments
from tube_incidence_lab.energy_fourier import reference_exponents
from tube_incidence_lab.energy_fourier import sample_curve_set
from tube_incidence_lab.family_io import read_family
from tube_incidence_lab.family_io import write_family
from tube_incidence_lab.grid_core import Scale
from tube_incidence_lab.highlow import fourier_split
from tube_incidence_lab.highlow import heavy_ball_scale
from tube_incidence_lab.incidence_engine import incidence_count
from tube_incidence_lab.incidence_engine import richness_map
from tube_incidence_lab.incidence_engine import st_ratio
from tube_incidence_lab.multiscale import decompose_family
from tube_incidence_lab.random_augment import DirectionalTubeFamily
from tube_incidence_lab.random_augment import augment_rigid
from tube_incidence_lab.random_augment import augment_translates
from tube_incidence_lab.random_augment import maximal_configuration
from tube_incidence_lab.reporting import write_csv
from tube_incidence_lab.reporting import write_report
from tube_incidence_lab.reporting import write_svg
from tube_incidence_lab.set_tools import check_delta_set
from tube_incidence_lab.set_tools import check_katz_tao
from tube_incidence_lab.set_tools import extract_uniform
from tube_incidence_lab.set_tools import generate_ad_regular
from tube_incidence_lab.set_tools import generate_binary_ad_regular
from tube_incidence_lab.set_tools import generate_random_frostman
from tube_incidence_lab.set_tools import partition_uniform
from tube_incidence_lab.settings import SettingsError
from tube_incidence_lab.two_ends import dichotomy_audit
from tube_incidence_lab.two_ends import spread_bush_system
from tube_incidence_lab.two_ends import two_ends_refine
from tube_incidence_lab.utils import as_fraction
from tube_incidence_lab.utils import derived_seed
from tube_incidence_lab.utils import parallel_map
import os

"""This module contains one runner per subcommand. A runner reads its
section of the configuration, writes its artifacts to the output
directory, and returns a Verdict."""


# The outcome of a runner: whether its checks passed, and a one-line
# message.
Verdict = namedtuple("Verdict", "ok message")

# The context shared by every runner.
RunContext = namedtuple(
    "RunContext", "settings section out_dir seed threads digest overrides")

# The flags of each subcommand that override a key of its section: the
# flag, the key, and the add_argument options.
CLI_OPTIONS = {
    Subcommand.CHECK: (
        ("--kind", "kind", {"choices": ("delta", "kt"), "help": (
            "Check a (δ,s,C)-set (delta) or a (δ,s,C)-Katz-Tao set (kt).")}),
        ("--s", "s", {"help": "The exponent s, a rational such as 1/2."}),
        ("--const", "C", {"help": "The constant C, a rational."}),
    ),
    Subcommand.AUGMENT: (
        ("--mode", "mode", {"choices": ("translates", "rigid"), "help": (
            "Union of random translates of an interval family, or random "
            "direction shifts and intercept translates of a tube family.")}),
        ("--retries", "retries", {"type": int, "help": (
            "The number of seeded attempts before giving up.")}),
    ),
}

# The CSV columns written by each subcommand, documented in --help.
CSV_COLUMNS = {
    Subcommand.GEN: (),
    Subcommand.CHECK: ("k", "cells", "max_count"),
    Subcommand.INCIDENCE: ("r", "squares"),
    Subcommand.ST_SCAN: ("e", "tubes", "max_ratio", "argmax_r",
                         "st_constant"),
    Subcommand.DECOMPOSE: ("start_level", "end_level", "slope",
                           "parents", "max_constant", "nominal_constant"),
    Subcommand.UNIFORMIZE: ("part", "size"),
    Subcommand.AUGMENT: ("attempt", "size", "katz_tao_constant",
                         "max_multiplicity"),
    Subcommand.TWO_ENDS: ("stage", "name", "pairs", "square_side",
                          "tube_side"),
    Subcommand.HIGHLOW: ("delta_tilde_exp", "radius", "threshold",
                         "fraction"),
    Subcommand.ENERGY: ("e", "points", "lower", "upper", "ratio"),
    Subcommand.L6: ("R", "moment4", "moment6", "parseval_error"),
    Subcommand.SHARPNESS: ("r", "squares", "expected", "ratio"),
}


def _get(context, key, default=None):
    value = context.overrides.get(key)
    if value is None:
        value = context.settings.get(context.section, key, default)
    return value


def _require(context, key):
    value = _get(context, key)
    if value is None:
        raise SettingsError(
            f"Key {key} is missing from section [{context.section}].")
    return value


def _fraction(context, key, default=None):
    value = _get(context, key)
    if value is None:
        if default is None:
            raise SettingsError(
                f"Key {key} is missing from section [{context.section}].")
        return Fraction(default)
    return as_fraction(value, key)


def _int(context, key, default=None):
    value = context.overrides.get(key)
    if value is None:
        value = context.settings.get_int(context.section, key, default)
    if value is None:
        raise SettingsError(
            f"Key {key} is missing from section [{context.section}].")
    return value


def _path(context, name):
    return os.path.join(context.out_dir, name)


def _csv(context, name, rows):
    path = _path(context, name)
    write_csv(path, CSV_COLUMNS[context.section], rows, context.seed,
              context.digest)
    return path


def run_gen(context):
    """Generates a family and writes it in the Family text format."""
    generator = _require(context, "generator")
    e = _int(context, "e")
    seed = context.seed
    if generator == "ad-regular":
        scale = Scale(e, _int(context, "T", 1))
        kind = context.settings.get(context.section, "kind",
                                    FamilyKind.INTERVALS)
        family = generate_ad_regular(scale, _fraction(context, "s"), seed,
                                     kind)
    elif generator == "binary":
        family = generate_binary_ad_regular(e, _fraction(context, "s"), seed)
    elif generator == "frostman":
        kind = context.settings.get(context.section, "kind",
                                    FamilyKind.INTERVALS)
        family = generate_random_frostman(
            Scale(e, 1), _fraction(context, "s"), seed,
            _fraction(context, "K", 1), kind)
    elif generator == "maximal":
        family = maximal_configuration(
            e, _fraction(context, "s"), seed).family.tubes()
    elif generator == "train-track":
        construction = train_track(e)
        write_family(_path(context, "directions.family"),
                     construction.directions)
        family = construction.tubes
    else:
        raise SettingsError(f"Generator {generator} is not recognized.")
    path = _path(context, "family.family")
    write_family(path, family)
    return Verdict(True, f"Generated {len(family)} {family.kind} into "
                         f"{path}.")


def run_check(context):
    """Checks a family file against a non-concentration bound.

    Kind delta checks a (δ,s,C)-set and kind kt a (δ,s,C)-Katz-Tao set.
    The CSV holds the largest cell count at every dyadic scale."""
    family = read_family(_require(context, "input"))
    s = _fraction(context, "s")
    constant = _fraction(context, "C", 1)
    kind = _get(context, "kind", "delta")
    if kind == "delta":
        report = check_delta_set(family, s, constant)
    elif kind == "kt":
        report = check_katz_tao(family, s, constant)
    else:
        raise SettingsError(f"Kind {kind} is not delta or kt.")
    rows = []
    for k in range(family.scale.delta_exp + 1):
        counts = family.parent_counts(k)[1]
        rows.append((k, len(counts), int(counts.max())))
    _csv(context, "check.csv", rows)
    write_report(_path(context, "check.txt"), report._asdict())
    status = "passed" if report.ok else "failed"
    return Verdict(report.ok, (
        f"Check {kind} s={s} C={constant} {status} with constant "
        f"{report.achieved_constant:.6g} at k={report.worst_radius_exp}."))


def run_incidence(context):
    """Counts the richness of a tube family, and its incidences with a
    square family if one is given."""
    tubes = read_family(_require(context, "tubes"))
    histogram = richness_map(tubes, threads=context.threads).histogram()
    _csv(context, "incidence.csv", zip(histogram.bins, histogram.counts))
    message = f"{len(tubes)} tubes, {sum(histogram.counts)} rich squares."
    squares_path = context.settings.get(context.section, "squares")
    if squares_path:
        report = incidence_count(read_family(squares_path), tubes,
                                 threads=context.threads)
        write_report(_path(context, "incidence.txt"), report._asdict())
        message = f"{message} I(P, T) = {report.count}."
    return Verdict(True, message)


def run_st_scan(context):
    """Measures the ST ratio of generated configurations over a sweep of
    exponents and fits its growth against 1/δ."""
    exponents = context.settings.get_int_list(context.section, "e")
    if not exponents:
        raise SettingsError(
            f"Key e is missing from section [{context.section}].")
    s = _fraction(context, "s")
    construction = context.settings.get(
        context.section, "construction", "maximal")
    if construction not in ("maximal", "bush"):
        raise SettingsError(
            f"Construction {construction} is not maximal or bush.")

    def measure(e):
        if construction == "bush":
            tubes = bush_example(e, s, derived_seed(context.seed, e)).tubes
        else:
            tubes = maximal_configuration(
                e, s, derived_seed(context.seed, e)).family.tubes()
        report = st_ratio(tubes)
        return (e, len(tubes), report.max_ratio, report.argmax_r,
                report.st_constant)

    rows = sorted(parallel_map(measure, exponents, threads=context.threads))
    _csv(context, "st_scan.csv", rows)
    points = [(2 ** row[0], row[2]) for row in rows if row[2] > 0]
    if len(points) < 2:
        return Verdict(True, f"Measured {len(rows)} point(s); no fit.")
    fit = exponent_fit(points)
    write_svg(_path(context, "st_scan.svg"), f"ST ratio, s={s}", points,
              (fit.slope, fit.intercept), "1/δ", "max ST ratio")
    limit = context.settings.get(context.section, "max_slope")
    ok = limit is None or fit.slope <= float(as_fraction(limit, "max_slope"))
    return Verdict(ok, (
        f"ST ratio exponent {fit.slope:.4f} (residual {fit.residual:.3g}) "
        f"over e={rows[0][0]}..{rows[-1][0]}."))


def run_decompose(context):
    """Decomposes the branching profile of a uniform family into good
    intervals."""
    family = read_family(_require(context, "input"))
    eps = _fraction(context, "eps")
    decomposition = decompose_family(family, eps, threads=context.threads)
    rows = [(level.start_level, level.end_level, float(level.slope),
             level.parents, level.max_constant, level.nominal_constant)
            for level in decomposition.levels]
    _csv(context, "decompose.csv", rows)
    ok = decomposition.growth_ok and decomposition.top_slope_ok
    return Verdict(ok, (
        f"{len(rows)} intervals, growth {decomposition.growth_ok}, top "
        f"slope {decomposition.top_slope_ok}."))


def run_uniformize(context):
    """Extracts a uniform subset of a family and partitions the family
    into uniform parts."""
    family = read_family(_require(context, "input"))
    subset = extract_uniform(family, context.seed)
    write_family(_path(context, "uniform.family"), subset.family)
    partition = partition_uniform(family, context.seed)
    _csv(context, "uniformize.csv",
         [(i, len(part)) for i, part in enumerate(partition.parts)])
    ok = subset.ratio >= subset.guaranteed_ratio and partition.within_bound
    return Verdict(ok, (
        f"Uniform subset of {len(subset.family)} of {len(family)}; "
        f"{len(partition.parts)} parts (bound {partition.bound:.4g})."))


def run_augment(context):
    """Augments a family by seeded random translates.

    Mode translates unions random translates of an interval family. Mode
    rigid shifts the directions and translates the intercepts of a tube
    family, starting from a single tube at scale e when no input is
    given."""
    mode = _get(context, "mode", "translates")
    s = _fraction(context, "s")
    upsilon = _fraction(context, "upsilon", 0)
    retries = _int(context, "retries", DEFAULT_RETRIES)
    log_loss = context.settings.get_boolean(context.section, "log_loss",
                                            True)
    input_path = _get(context, "input")
    if mode == "translates":
        if input_path is None:
            raise SettingsError(
                "Mode translates needs an input interval family.")
        result = augment_translates(
            read_family(input_path), s, _fraction(context, "K", 1), upsilon,
            context.seed, retries=retries, log_loss=log_loss)
        family = result.family
        checks = result.checks
    elif mode == "rigid":
        K1 = _fraction(context, "K", 1)
        K2 = _fraction(context, "K2", 1)
        thickness = DEFAULT_THICKNESS
        if input_path is None:
            result = maximal_configuration(
                _int(context, "e"), s, context.seed, K1=K1, K2=K2,
                upsilon=upsilon, retries=retries, log_loss=log_loss)
        else:
            source = read_family(input_path)
            thickness = source.thickness
            tubes = DirectionalTubeFamily.from_family(source)
            result = augment_rigid(tubes, s, K1, K2, upsilon, context.seed,
                                   retries=retries, log_loss=log_loss)
        family = result.family.tubes(thickness)
        checks = result.direction_checks
    else:
        raise SettingsError(f"Mode {mode} is not translates or rigid.")
    write_family(_path(context, "augmented.family"), family)
    _csv(context, "augment.csv",
         [(result.attempts, len(family), checks.measured_constant,
           checks.max_multiplicity)])
    return Verdict(True, (
        f"Augmented to {len(family)} {family.kind} in {result.attempts} "
        f"attempt(s)."))


def run_two_ends(context):
    """Refines a system of spread bushes to two-ends segments and audits
    the incidence dichotomy."""
    e = _int(context, "e")
    scale = Scale(e, _int(context, "T", 1))
    s = _fraction(context, "s")
    eps = _fraction(context, "eps")
    system = spread_bush_system(scale, s, context.seed,
                                _int(context, "column_step", 4))
    result = two_ends_refine(system, eps, threads=context.threads)
    _csv(context, "two_ends.csv",
         [(i, stage.name, stage.pairs, stage.square_side, stage.tube_side)
          for i, stage in enumerate(result.stages)])
    audit = dichotomy_audit(system, s, eps, _fraction(context, "eta", 0))
    write_report(_path(context, "two_ends.txt"), audit._asdict())
    return Verdict(result.scale_ok, (
        f"ρ̃ = 2^-{result.rho_tilde_exp}, {len(result.system)} surviving "
        f"pairs, audit item {audit.item}."))


def _tubes_for(context):
    path = context.settings.get(context.section, "tubes")
    if path:
        return read_family(path)
    return train_track(_int(context, "e")).tubes


def run_highlow(context):
    """Splits the tube sum function into frequency bands and searches
    for the heavy-ball scale."""
    tubes = _tubes_for(context)
    beta = _fraction(context, "beta")
    split = fourier_split(tubes, beta, threads=context.threads)
    default_r0 = 1 << (tubes.scale.delta_exp // 2)
    result = heavy_ball_scale(
        tubes, _int(context, "r0", default_r0), beta,
        _fraction(context, "upsilon", 0), threads=context.threads)
    _csv(context, "highlow.csv", result.table)
    write_report(_path(context, "highlow.txt"), {
        "high_energy": split.high_energy,
        "high_ratio": split.high_ratio,
        "low_sup": split.low_sup,
        "reconstruction_error": split.reconstruction_error,
        "hypothesis_holds": result.hypothesis_holds,
        "delta_tilde_exp": result.delta_tilde_exp,
    })
    found = result.delta_tilde_exp is not None
    scale = f"2^-{result.delta_tilde_exp}" if found else "none"
    return Verdict(found, (
        f"High energy ratio {split.high_ratio:.4g}; heavy-ball scale "
        f"{scale}."))


def run_energy(context):
    """Sweeps the sixfold energy of Cantor sets on a curve over e."""
    exponents = context.settings.get_int_list(context.section, "e")
    if not exponents:
        raise SettingsError(
            f"Key e is missing from section [{context.section}].")
    curve = context.settings.get(context.section, "curve", "parabola")
    s = _fraction(context, "s")
    c = _fraction(context, "c", 1)
    kind = context.settings.get(context.section, "kind", CANTOR)

    def measure(e):
        S = sample_curve_set(curve, e, s, context.seed, kind)
        report = energy3(S, c)
        return (e, len(S.points), report.lower, report.upper,
                report.upper / 2.0 ** (e * float(s) * 3.75))

    rows = sorted(parallel_map(measure, exponents, threads=context.threads))
    _csv(context, "energy.csv", rows)
    points = [(2 ** row[0], row[3]) for row in rows]
    if len(points) < 2:
        return Verdict(True, f"E3 upper bound {rows[0][3]}.")
    fit = exponent_fit(points)
    write_svg(_path(context, "energy.svg"), f"E3, s={s}", points,
              (fit.slope, fit.intercept), "1/δ", "E3 upper")
    return Verdict(True, f"E3 exponent {fit.slope:.4f} against 1/δ.")


def run_l6(context):
    """Sweeps the L4 and L6 moments of the Fourier transform of a
    Cantor measure on a curve over R."""
    exponents = context.settings.get_int_list(context.section, "k")
    if not exponents:
        raise SettingsError(
            f"Key k is missing from section [{context.section}].")
    curve = context.settings.get(context.section, "curve", "parabola")
    s = _fraction(context, "s")

    def measure(k):
        R = 1 << k
        mu = cantor_measure(curve, k, s, R, context.seed)
        fourth = mu_hat_moments(mu, R, 4)
        sixth = mu_hat_moments(mu, R, 6)
        return (R, fourth.moment, sixth.moment, sixth.parseval_error)

    rows = sorted(parallel_map(measure, exponents, threads=context.threads))
    _csv(context, "l6.csv", rows)
    proved, conjectured = reference_exponents(s)
    if len(rows) < 2:
        return Verdict(True, f"L6 moment {rows[0][2]:.6g}.")
    fit = exponent_fit([(row[0], row[2]) for row in rows])
    write_svg(_path(context, "l6.svg"), f"L6 moment, s={s}",
              [(row[0], row[2]) for row in rows],
              (fit.slope, fit.intercept), "R", "moment")
    return Verdict(True, (
        f"L6 exponent {fit.slope:.4f}; proved {proved:.4f}, conjectured "
        f"{conjectured:.4f}."))


def run_sharpness(context):
    """Builds a sharpness configuration, writes it, and reports its
    verdicts."""
    construction_name = _require(context, "construction")
    e = _int(context, "e")
    if construction_name == "bush":
        construction = bush_example(e, _fraction(context, "s"), context.seed)
        _csv(context, "sharpness.csv", construction.report["richness_table"])
        ok = all(row.ratio >= 1 / 8
                 for row in construction.report["richness_table"])
    elif construction_name == "train-track":
        construction = train_track(e)
        ok = construction.report["rich_squares"] >= (1 << e) // 4
    elif construction_name == "area":
        construction = area_saturation(
            e, _fraction(context, "s"), _fraction(context, "t"),
            context.seed)
        ok = construction.report["covered_fraction"] >= 0.5
    else:
        raise SettingsError(
            f"Construction {construction_name} is not bush, train-track, "
            f"or area.")
    write_family(_path(context, "sharpness.family"), construction.tubes)
    report = {key: value for key, value in construction.report.items()
              if key != "richness_table"}
    write_report(_path(context, "sharpness.txt"), report)
    return Verdict(ok, (
        f"{construction_name}: {len(construction.tubes)} tubes, "
        f"verdict {'holds' if ok else 'fails'}."))


RUNNERS = {
    Subcommand.GEN: run_gen,
    Subcommand.CHECK: run_check,
    Subcommand.INCIDENCE: run_incidence,
    Subcommand.ST_SCAN: run_st_scan,
    Subcommand.DECOMPOSE: run_decompose,
    Subcommand.UNIFORMIZE: run_uniformize,
    Subcommand.AUGMENT: run_augment,
    Subcommand.TWO_ENDS: run_two_ends,
    Subcommand.HIGHLOW: run_highlow,
    Subcommand.ENERGY: run_energy,
    Subcommand.L6: run_l6,
    Subcommand.SHARPNESS: run_sharpness,
}
