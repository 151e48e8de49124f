# Debiased self-training laboratory
