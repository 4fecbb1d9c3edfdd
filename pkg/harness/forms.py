# harness/forms.py
from django import forms
from django.conf import settings

from linalg.models import Permutation
from orderings.models import WITH_SIGMA, OrderingKind
from problems.models import ProblemKind

from .models import SolveMethod

GENERATED_KINDS = [(k, label) for k, label in ProblemKind.choices if k != ProblemKind.FILE]


class OmegaField(forms.FloatField):
    def validate(self, value):
        super().validate(value)
        if value is not None and not 0.0 < value < 2.0:
            raise forms.ValidationError("omega must lie in (0, 2)")


# -------- problem source --------
class GeneratorForm(forms.Form):
    """Generator options: kind plus the sizes that kind needs."""

    kind = forms.ChoiceField(choices=GENERATED_KINDS, required=False)
    m = forms.IntegerField(min_value=1, required=False)
    n = forms.IntegerField(min_value=1, required=False)
    r = forms.IntegerField(min_value=1, required=False)
    complex = forms.BooleanField(required=False)
    seed = forms.IntegerField(min_value=0, max_value=2**64 - 1, required=False)

    generator_required = True

    def clean_seed(self):
        seed = self.cleaned_data.get("seed")
        return settings.SHUFFLED_SOR["DEFAULT_SEED"] if seed is None else seed

    def clean(self):
        cleaned = super().clean()
        kind = cleaned.get("kind")
        if not kind:
            if self.generator_required:
                self.add_error("kind", "choose a problem kind")
            return cleaned
        m, n, r = cleaned.get("m"), cleaned.get("n"), cleaned.get("r")
        if self.errors:
            return cleaned
        if kind == ProblemKind.FAN and m is None:
            self.add_error("m", "fan problems need --m")
        if kind in (ProblemKind.RANDOM, ProblemKind.LOWRANK) and n is None:
            self.add_error("n", f"{kind} problems need --n")
        if kind == ProblemKind.LOWRANK:
            if r is None:
                self.add_error("r", "lowrank problems need --r")
            elif n is not None and r > n:
                self.add_error("r", "rank r must not exceed n")
        return cleaned


class GenerateForm(GeneratorForm):
    out_dir = forms.CharField()


class ProblemForm(GeneratorForm):
    """Either --problem DIR or generator options."""

    problem = forms.CharField(required=False)
    generator_required = False

    def clean(self):
        cleaned = super().clean()
        has_dir = bool(cleaned.get("problem"))
        has_kind = bool(cleaned.get("kind"))
        if has_dir == has_kind:
            raise forms.ValidationError("give exactly one of --problem DIR or --kind")
        return cleaned


# -------- runs --------
class RunForm(ProblemForm):
    omega = OmegaField(required=False)
    max_sweeps = forms.IntegerField(min_value=1, required=False)
    target_error_sq = forms.FloatField(min_value=0.0, required=False)
    sigma = forms.CharField(required=False)
    method = forms.ChoiceField(choices=SolveMethod.choices, required=False)
    allow_inconsistent = forms.BooleanField(required=False)
    out = forms.CharField()

    def clean_omega(self):
        omega = self.cleaned_data.get("omega")
        return 1.0 if omega is None else omega

    def clean_max_sweeps(self):
        return self.cleaned_data.get("max_sweeps") or 100

    def clean_method(self):
        return self.cleaned_data.get("method") or SolveMethod.SOR

    def clean_sigma(self):
        text = self.cleaned_data.get("sigma")
        if not text:
            return None
        try:
            return Permutation.parse(text)
        except ValueError as exc:
            raise forms.ValidationError(f"invalid permutation: {exc}")

    def check_sigma_usage(self, kinds, seed_given: bool) -> None:
        sigma = self.cleaned_data.get("sigma")
        if OrderingKind.FIXED in kinds and sigma is None:
            self.add_error("sigma", "fixed ordering needs --sigma")
        if sigma is not None and not any(k in WITH_SIGMA for k in kinds):
            self.add_error("sigma", "--sigma only applies to fixed or preshuffled orderings")
        if OrderingKind.PRESHUFFLED in kinds and sigma is None and not seed_given:
            self.add_error("sigma", "preshuffled ordering needs --sigma or --seed")


class SolveForm(RunForm):
    strategy = forms.ChoiceField(choices=OrderingKind.choices, required=False)
    window = forms.IntegerField(min_value=1, required=False)

    def clean_strategy(self):
        return self.cleaned_data.get("strategy") or OrderingKind.CYCLIC

    def clean_window(self):
        return self.cleaned_data.get("window") or 5

    def clean(self):
        cleaned = super().clean()
        if "strategy" in cleaned:
            self.check_sigma_usage([cleaned["strategy"]], self.data.get("seed") is not None)
        return cleaned


class CompareForm(RunForm):
    strategies = forms.CharField(required=False)
    trials = forms.IntegerField(min_value=1, required=False)
    plot = forms.CharField(required=False)
    summary = forms.CharField(required=False)

    def clean_strategies(self):
        text = self.cleaned_data.get("strategies") or "cyclic,shuffled"
        kinds = [part.strip() for part in text.split(",") if part.strip()]
        unknown = [k for k in kinds if k not in OrderingKind.values]
        if unknown:
            raise forms.ValidationError(f"unknown strategies: {', '.join(unknown)}")
        if len(set(kinds)) != len(kinds):
            raise forms.ValidationError("strategies must not repeat")
        return kinds

    def clean_trials(self):
        return self.cleaned_data.get("trials") or 10

    def clean(self):
        cleaned = super().clean()
        if "strategies" in cleaned:
            # each trial draws its own preshuffled permutation from the trial seed
            self.check_sigma_usage(cleaned["strategies"], seed_given=True)
        return cleaned


# -------- reports --------
class AnalyzeForm(ProblemForm):
    restarts = forms.IntegerField(min_value=1, required=False)
    trials = forms.IntegerField(min_value=1, required=False)

    def clean_restarts(self):
        return self.cleaned_data.get("restarts") or 20

    def clean_trials(self):
        return self.cleaned_data.get("trials") or 1000


class BoundsForm(ProblemForm):
    omega = OmegaField(required=False)
    c0 = forms.FloatField(required=False)
    c1 = forms.FloatField(required=False)
    c2 = forms.FloatField(required=False)
    format = forms.ChoiceField(choices=[("text", "text"), ("csv", "csv")], required=False)

    def clean_omega(self):
        omega = self.cleaned_data.get("omega")
        return 1.0 if omega is None else omega

    def clean_c0(self):
        c0 = self.cleaned_data.get("c0")
        if c0 is not None and c0 <= 0:
            raise forms.ValidationError("c0 must be positive")
        return c0

    def clean_format(self):
        return self.cleaned_data.get("format") or "text"


class PlotForm(forms.Form):
    csv = forms.CharField()
    out = forms.CharField()
    no_trials = forms.BooleanField(required=False)
