"""Finite presheaf model over the truncated time category."""
from .timecat import (ElObj, FinCategory, TimeMor, TimeObj,
                      enumerate_category, mor_key, obj_key, pool_names,
                      slice_category)
from .presheaf import (CheckOutcome, FreshClockExhausted, Model, Psh,
                       align, arrow, check_functoriality, check_invariance,
                       clk_psh, clock_intros, const_psh, coproduct,
                       forall_clk, later, product, restrict_to, weaken)
from .typeexpr import (ForceReport, MAnd, MArrow, MBot, MClk, MEq,
                       MExists, MFin, MForall, MForallFam, MLater, MMu,
                       MOr, MProd, MSum, MTop, TypeExprM, check_force,
                       eval_type, mu)
from .experiments import (DistReport, FiberVerdict,
                          check_forall_prod_dist, check_forall_sum_dist,
                          exists_forall_experiment, unique_exists_check)

__all__ = [
    "ElObj", "FinCategory", "TimeMor", "TimeObj", "enumerate_category",
    "mor_key", "obj_key", "pool_names", "slice_category",
    "CheckOutcome", "FreshClockExhausted", "Model", "Psh", "align",
    "arrow", "check_functoriality", "check_invariance", "clk_psh",
    "clock_intros", "const_psh", "coproduct", "forall_clk", "later",
    "product", "restrict_to", "weaken",
    "ForceReport", "MAnd", "MArrow", "MBot", "MClk", "MEq", "MExists",
    "MFin", "MForall", "MForallFam", "MLater", "MMu", "MOr", "MProd",
    "MSum", "MTop", "TypeExprM", "check_force", "eval_type", "mu",
    "DistReport", "FiberVerdict", "check_forall_prod_dist",
    "check_forall_sum_dist", "exists_forall_experiment",
    "unique_exists_check",
]
