from gausscrit.cli import main

main()
