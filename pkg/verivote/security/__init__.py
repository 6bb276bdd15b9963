"""
Adversarial harness for exercising the verifiers.
"""
