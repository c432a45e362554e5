import sys

from iccv_simulator import RunConfig


def generate_config(output_file='config.json'):
    config = RunConfig()
    config.save_json(output_file)
    print(f"Config saved to {output_file}")

if __name__ == "__main__":
    generate_config(*sys.argv[1:2])
