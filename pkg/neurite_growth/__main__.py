from neurite_growth.cli.cli import main

main()
