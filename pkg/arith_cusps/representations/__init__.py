from .rep_forms import RepGenerators, SymFormSpace, average_form, cyclic_prime_rep, invariant_form_space

__all__ = ["RepGenerators", "SymFormSpace", "average_form", "cyclic_prime_rep", "invariant_form_space"]
