public class Other {
    int twice(int x) {
        int y = x * 2;
        return y;
    }
}
