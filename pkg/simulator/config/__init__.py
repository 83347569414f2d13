import json
import os

config_file = os.path.join(os.path.dirname(__file__), "config.json")

def get_config_file():
    with open(config_file, 'r', encoding='utf-8') as file:
        return json.loads(file.read())

config = get_config_file()
scenario = config["scenario"]
path_loss = config["path_loss"]
rician = config["rician"]
power = config["power"]
solver = config["solver"]
experiment = config["experiment"]
oracle = config["oracle"]


def flat_defaults():
    """All default config keys merged into one flat key -> value mapping."""
    merged = {}
    for section in (scenario, path_loss, rician, power, solver, experiment, oracle):
        merged.update(section)
    return merged
