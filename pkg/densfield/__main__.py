from densfield.cli.main import main

main()
