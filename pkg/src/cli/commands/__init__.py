"""
CLI命令模块
每个子命令一个模块：affinity / loss / strengthen / eval / perturb / synth / selfcheck
"""
