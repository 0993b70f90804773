package corpus;

public class Empty {
}
